use std::fmt;

use crate::qsim::PiLabel;

/// Atoms moved into and out of the cavity in one step.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransportStep {
    pub into: Vec<usize>,
    pub out: Vec<usize>,
    /// Transport time in seconds.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecordEntry {
    Measure { atoms: [usize; 2], outcome: PiLabel, reported: PiLabel, probability: f64 },
    Correction { atoms: [usize; 2], op: String, trigger: String },
    Transport { step: TransportStep, phases: Vec<(usize, f64)> },
    Gate { name: String, atoms: Vec<usize> },
    Result { name: String, value: String },
}

fn join(xs: &[usize]) -> String {
    if xs.is_empty() {
        return "-".into();
    }
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for RecordEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordEntry::Measure { atoms, outcome, reported, probability } => write!(
                f,
                "measure atoms={} outcome={} reported={} p={:.12}",
                join(atoms),
                outcome.as_str(),
                reported.as_str(),
                probability
            ),
            RecordEntry::Correction { atoms, op, trigger } => {
                write!(f, "correct atoms={} op={} trigger={}", join(atoms), op, trigger)
            }
            RecordEntry::Transport { step, phases } => {
                write!(f, "transport in={} out={} tau={:e}", join(&step.into), join(&step.out), step.duration)?;
                for (q, phi) in phases {
                    write!(f, " phi{q}={phi:.12e}")?;
                }
                Ok(())
            }
            RecordEntry::Gate { name, atoms } => write!(f, "gate {} atoms={}", name, join(atoms)),
            RecordEntry::Result { name, value } => write!(f, "result {name}={value}"),
        }
    }
}

/// Append-only log of everything a run did, one entry per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutcomeRecord {
    entries: Vec<RecordEntry>,
}

impl OutcomeRecord {
    pub fn push(&mut self, entry: RecordEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[RecordEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Product of the recorded outcome probabilities.
    pub fn branch_probability(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| match e {
                RecordEntry::Measure { probability, .. } => *probability,
                _ => 1.0,
            })
            .product()
    }

    pub fn measurements(&self) -> impl Iterator<Item = &RecordEntry> {
        self.entries.iter().filter(|e| matches!(e, RecordEntry::Measure { .. }))
    }

    pub fn transport_steps(&self) -> impl Iterator<Item = &TransportStep> {
        self.entries.iter().filter_map(|e| match e {
            RecordEntry::Transport { step, .. } => Some(step),
            _ => None,
        })
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (k, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{k} {e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_are_numbered_in_order() {
        let mut r = OutcomeRecord::default();
        r.push(RecordEntry::Gate { name: "cz".into(), atoms: vec![0, 2] });
        r.push(RecordEntry::Measure { atoms: [0, 1], outcome: PiLabel::Pi3, reported: PiLabel::Pi4, probability: 0.5 });
        r.push(RecordEntry::Correction { atoms: [2, 3], op: "X".into(), trigger: "zz=pi4".into() });
        r.push(RecordEntry::Transport {
            step: TransportStep { into: vec![1], out: vec![], duration: 1e-4 },
            phases: vec![(0, 0.25)],
        });
        let text = r.to_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "0 gate cz atoms=0,2");
        assert_eq!(lines[1], "1 measure atoms=0,1 outcome=pi3 reported=pi4 p=0.500000000000");
        assert_eq!(lines[2], "2 correct atoms=2,3 op=X trigger=zz=pi4");
        assert!(lines[3].starts_with("3 transport in=1 out=- tau=1e-4 phi0="));
        assert_eq!(r.branch_probability(), 0.5);
        assert_eq!(r.transport_steps().count(), 1);
    }
}
