//! Report structure and its human, CSV and JSON renderings.
//!
//! CSV is long-format with the fixed header `section,row,column,value`:
//! summary fields are `summary,<name>,value,<v>`, checks are
//! `check,<name>,status|detail,<v>`, and table cells are
//! `<table>,<1-based row>,<column>,<v>`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not run, e.g. because a model was too large.
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Field {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub summary: Vec<Field>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.into(), summary: Vec::new(), checks: Vec::new(), tables: Vec::new() }
    }

    pub fn field(&mut self, name: &str, value: impl ToString) {
        self.summary.push(Field { name: name.into(), value: value.to_string() });
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status: Status::from_bool(ok), detail: detail.into() });
    }

    pub fn skip(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status: Status::Skip, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.summary.iter().find(|f| f.name == name).map(|f| f.value.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Csv,
    Json,
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Human => human(report),
        Format::Csv => csv(report),
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

fn aligned(rows: &[Vec<String>], indent: &str, out: &mut String) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for row in rows {
        let mut line = indent.to_string();
        for (c, cell) in row.iter().enumerate() {
            if c + 1 == row.len() {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}  ", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn human(report: &Report) -> String {
    let mut out = format!("{}\n", report.command);
    let summary: Vec<Vec<String>> = report.summary.iter().map(|f| vec![f.name.clone(), f.value.clone()]).collect();
    aligned(&summary, "  ", &mut out);
    if !report.checks.is_empty() {
        out.push_str("checks\n");
        let checks: Vec<Vec<String>> = report
            .checks
            .iter()
            .map(|c| vec![c.status.label().into(), c.name.clone(), c.detail.clone()])
            .collect();
        aligned(&checks, "  ", &mut out);
    }
    for table in &report.tables {
        out.push_str(&format!("{}\n", table.name));
        let mut rows = vec![table.columns.clone()];
        rows.extend(table.rows.iter().cloned());
        aligned(&rows, "  ", &mut out);
    }
    let verdict = if report.passed() { "all checks passed" } else { "some checks FAILED" };
    out.push_str(verdict);
    out.push('\n');
    out
}

fn csv(report: &Report) -> String {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let mut put = |a: &str, b: &str, c: &str, d: &str| w.write_record([a, b, c, d]).expect("in-memory write");
    put("section", "row", "column", "value");
    put("summary", "command", "value", &report.command);
    for f in &report.summary {
        put("summary", &f.name, "value", &f.value);
    }
    for c in &report.checks {
        put("check", &c.name, "status", c.status.label());
        put("check", &c.name, "detail", &c.detail);
    }
    for t in &report.tables {
        for (r, row) in t.rows.iter().enumerate() {
            for (col, cell) in t.columns.iter().zip(row) {
                put(&t.name, &(r + 1).to_string(), col, cell);
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo");
        r.field("alg", "4");
        r.check("identity", true, "4 = 4");
        let mut t = Table::new("jobs", &["job", "note"]);
        t.push(vec!["1".into(), "a, b".into()]);
        r.tables.push(t);
        r
    }

    #[test]
    fn csv_is_long_format() {
        let text = render(&sample(), Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "section,row,column,value");
        assert!(lines.contains(&"summary,alg,value,4"));
        assert!(lines.contains(&"check,identity,status,PASS"));
        assert!(lines.contains(&"jobs,1,note,\"a, b\""));
    }

    #[test]
    fn human_and_json() {
        let r = sample();
        let human = render(&r, Format::Human);
        assert!(human.contains("  alg  4\n"));
        assert!(human.ends_with("all checks passed\n"));
        let json: serde_json::Value = serde_json::from_str(&render(&r, Format::Json)).unwrap();
        assert_eq!(json["checks"][0]["status"], "pass");
        let mut bad = r.clone();
        bad.check("other", false, "");
        assert!(!bad.passed());
        bad.checks.pop();
        bad.skip("lp", "too large");
        assert!(bad.passed());
    }
}
