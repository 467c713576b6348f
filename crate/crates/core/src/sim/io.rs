//! Trajectory CSV.
//!
//! Wide format (one file per replica): `t,S_1..S_N,P_1..P_N[,S_k_h...]`.
//! Long format (all replicas): the same columns preceded by `replica`.
//! Split columns are `S_{k}_{h}` in row-major `(k, h)` order. Seeds are not
//! stored; trajectories read back carry `seed = 0`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use super::{Checkpoint, Trajectory};

#[derive(Debug, Error)]
pub enum TrajectoryCsvError {
    #[error("trajectory CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory CSV: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory CSV line {line}: {reason}")]
    Schema { line: u64, reason: String },
}

fn header(n: usize, split: bool, long: bool) -> Vec<String> {
    let mut h = Vec::new();
    if long {
        h.push("replica".to_string());
    }
    h.push("t".into());
    h.extend((1..=n).map(|i| format!("S_{i}")));
    h.extend((1..=n).map(|i| format!("P_{i}")));
    if split {
        for k in 1..=n {
            h.extend((1..=n).map(|j| format!("S_{k}_{j}")));
        }
    }
    h
}

fn record(cp: &Checkpoint, replica: Option<u64>) -> Vec<String> {
    let mut r = Vec::new();
    if let Some(id) = replica {
        r.push(id.to_string());
    }
    r.push(cp.t.to_string());
    r.extend(cp.counts.iter().map(u64::to_string));
    r.extend(cp.probs.iter().map(|p| format!("{p:e}")));
    if let Some(split) = &cp.split {
        r.extend(split.iter().map(u64::to_string));
    }
    r
}

fn has_split(trajectories: &[Trajectory]) -> bool {
    trajectories
        .first()
        .and_then(|t| t.checkpoints.first())
        .is_some_and(|c| c.split.is_some())
}

pub fn write_wide<W: Write>(trajectory: &Trajectory, writer: W) -> Result<(), TrajectoryCsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header(
        trajectory.n(),
        has_split(std::slice::from_ref(trajectory)),
        false,
    ))?;
    for cp in &trajectory.checkpoints {
        w.write_record(record(cp, None))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_long<W: Write>(
    trajectories: &[Trajectory],
    writer: W,
) -> Result<(), TrajectoryCsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let n = trajectories.first().map_or(0, Trajectory::n);
    w.write_record(header(n, has_split(trajectories), true))?;
    for tr in trajectories {
        for cp in &tr.checkpoints {
            w.write_record(record(cp, Some(tr.replica_id)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads either format. A wide file yields one trajectory with
/// `replica_id = 0`; a long file yields one per replica, in replica order.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<Trajectory>, TrajectoryCsvError> {
    let mut r = csv::Reader::from_reader(reader);
    let head = r.headers()?.clone();
    let schema = |reason: String| TrajectoryCsvError::Schema { line: 1, reason };
    let long = head.get(0) == Some("replica");
    let offset = long as usize;
    if head.get(offset) != Some("t") {
        return Err(schema("missing t column".into()));
    }
    let n = head
        .iter()
        .skip(offset + 1)
        .take_while(|c| c.starts_with("S_") && !c[2..].contains('_'))
        .count();
    if n == 0 {
        return Err(schema("no S_h columns".into()));
    }
    let expected = header(n, false, long);
    let with_split = header(n, true, long);
    let split = if head.len() == with_split.len() && head.iter().eq(with_split.iter()) {
        true
    } else if head.len() == expected.len() && head.iter().eq(expected.iter()) {
        false
    } else {
        return Err(schema(format!("unexpected columns; expected {}", with_split.join(","))));
    };

    let mut by_replica: BTreeMap<u64, Vec<Checkpoint>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &str, v: &str| TrajectoryCsvError::Schema {
            line,
            reason: format!("invalid {field} value {v:?}"),
        };
        let int = |i: usize| -> Result<u64, TrajectoryCsvError> {
            let v = rec.get(i).unwrap_or("");
            v.trim().parse().map_err(|_| bad(&head[i], v))
        };
        let replica = if long { int(0)? } else { 0 };
        let t = int(offset)?;
        let counts = (0..n).map(|h| int(offset + 1 + h)).collect::<Result<_, _>>()?;
        let probs = (0..n)
            .map(|h| {
                let i = offset + 1 + n + h;
                let v = rec.get(i).unwrap_or("");
                v.trim().parse::<f64>().map_err(|_| bad(&head[i], v))
            })
            .collect::<Result<_, _>>()?;
        let split = if split {
            Some(
                (0..n * n)
                    .map(|k| int(offset + 1 + 2 * n + k))
                    .collect::<Result<_, _>>()?,
            )
        } else {
            None
        };
        by_replica.entry(replica).or_default().push(Checkpoint {
            t,
            counts,
            probs,
            split,
        });
    }
    by_replica
        .into_iter()
        .map(|(replica_id, mut checkpoints)| {
            checkpoints.sort_by_key(|c| c.t);
            if checkpoints.windows(2).any(|w| w[0].t == w[1].t) {
                return Err(TrajectoryCsvError::Schema {
                    line: 0,
                    reason: format!("replica {replica_id} has duplicate t values"),
                });
            }
            Ok(Trajectory {
                seed: 0,
                replica_id,
                checkpoints,
            })
        })
        .collect()
}
