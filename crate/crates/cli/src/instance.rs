//! The `SCHED v1` instance format.
//!
//! ```json
//! {
//!   "format": "SCHED v1",
//!   "machines": 2,
//!   "jobs": [
//!     {"id": 1, "w": "1", "r": 0, "proc": [[[2, "1"]], null]}
//!   ]
//! }
//! ```
//!
//! `proc[i]` is the pmf of the job on machine `i` as `[value, "p/q"]` pairs,
//! or `null` when the job cannot run there. `format` and `id` may be
//! omitted; a present `id` must be the job's 1-based position.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use stosched_core::rational;
use stosched_core::{Instance, Job, ProcDist, Rational};

use crate::CliError;

pub const FORMAT: &str = "SCHED v1";

#[derive(Debug, Clone, PartialEq, Eq)]
struct Q(Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational::fmt(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        rational::parse(&text)
            .map(Q)
            .ok_or_else(|| D::Error::custom(format!("invalid rational {text:?}, expected \"p/q\"")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    machines: usize,
    jobs: Vec<JobDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<usize>,
    w: Q,
    r: u64,
    proc: Vec<Option<Vec<(u64, Q)>>>,
}

fn field_error(job: usize, field: &str, msg: impl Into<String>) -> CliError {
    CliError::Schema { line: None, field: format!("jobs[{job}].{field}"), msg: msg.into() }
}

pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| CliError::Schema {
        line: Some(e.line()),
        field: String::new(),
        msg: e.to_string(),
    })?;
    if let Some(format) = &doc.format {
        if format != FORMAT {
            return Err(CliError::Schema {
                line: None,
                field: "format".into(),
                msg: format!("unsupported format {format:?}, expected {FORMAT:?}"),
            });
        }
    }
    let mut jobs = Vec::with_capacity(doc.jobs.len());
    for (j, job) in doc.jobs.into_iter().enumerate() {
        if job.id.is_some_and(|id| id != j + 1) {
            return Err(field_error(j, "id", format!("expected {}", j + 1)));
        }
        if job.proc.len() != doc.machines {
            return Err(field_error(j, "proc", format!("{} entries for {} machines", job.proc.len(), doc.machines)));
        }
        let mut proc = Vec::with_capacity(job.proc.len());
        for (i, entry) in job.proc.into_iter().enumerate() {
            let dist = entry
                .map(|pairs| ProcDist::new(pairs.into_iter().map(|(v, p)| (v, p.0))))
                .transpose()
                .map_err(|e| CliError::Pmf { job: j, machine: i, source: e })?;
            proc.push(dist);
        }
        jobs.push(Job::new(job.w.0, job.r, proc));
    }
    Ok(Instance::new(doc.machines, jobs)?)
}

pub fn emit_instance(inst: &Instance) -> String {
    let jobs = inst
        .jobs()
        .iter()
        .enumerate()
        .map(|(j, job)| JobDoc {
            id: Some(j + 1),
            w: Q(job.weight.clone()),
            r: job.release,
            proc: (0..inst.machines())
                .map(|i| inst.dist(i, j).map(|d| d.pmf().iter().map(|(v, p)| (*v, Q(p.clone()))).collect()))
                .collect(),
        })
        .collect();
    let doc = Document { format: Some(FORMAT.into()), machines: inst.machines(), jobs };
    let mut text = serde_json::to_string_pretty(&doc).expect("instance serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance() {
        let inst = parse_instance(r#"{"machines": 1, "jobs": [{"w": "1", "r": 0, "proc": [[[1, "1"]]]}]}"#).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(parse_instance(&emit_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let text = r#"{"machines": 1, "jobs": [{"w": "1", "r": 0, "proc": [[[1, "1/2"], [2, "2/5"]]]}]}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, CliError::Pmf { job: 0, machine: 0, source: stosched_core::Error::ProbSum { .. } }));
    }

    #[test]
    fn job_without_machines_is_unschedulable() {
        let text = r#"{"machines": 2, "jobs": [{"w": "1", "r": 0, "proc": [null, null]}]}"#;
        let err = parse_instance(text).unwrap_err();
        assert!(matches!(err, CliError::Model(stosched_core::Error::Unschedulable(0))));
    }

    #[test]
    fn schema_errors_carry_positions() {
        let text = "{\"machines\": 1,\n \"jobs\": [{\"w\": \"x\", \"r\": 0, \"proc\": [null]}]}";
        match parse_instance(text).unwrap_err() {
            CliError::Schema { line, msg, .. } => {
                assert_eq!(line, Some(2));
                assert!(msg.contains("invalid rational"), "{msg}");
            }
            e => panic!("{e:?}"),
        }
        let wrong_id = r#"{"machines": 1, "jobs": [{"id": 3, "w": "1", "r": 0, "proc": [[[1, "1"]]]}]}"#;
        assert!(matches!(parse_instance(wrong_id), Err(CliError::Schema { .. })));
        let bad_format = r#"{"format": "SCHED v2", "machines": 1, "jobs": []}"#;
        assert!(matches!(parse_instance(bad_format), Err(CliError::Schema { .. })));
    }
}
