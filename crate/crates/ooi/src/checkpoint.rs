//! Plain-text parameter checkpoints.
//!
//! ```text
//! ooi-checkpoint v1
//! array policy.w1 100 17
//! <17 values>
//! ... (100 rows)
//! array policy.b1 100 1
//! ...
//! end
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so a
//! save/load cycle is exact.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use ooi_core::learner::PolicyGradientAgent;
use ooi_core::policy::{Parameters, PolicyNet, ValueNet};

pub const MAGIC: &str = "ooi-checkpoint v1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("array {name}: expected shape {expected:?}, found {found:?}")]
    Shape { name: String, expected: [usize; 2], found: [usize; 2] },
    #[error("array {0} is missing")]
    Missing(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

pub fn write_arrays<W: Write>(arrays: &[NamedArray], mut out: W) -> io::Result<()> {
    let mut text = String::new();
    text.push_str(MAGIC);
    text.push('\n');
    for a in arrays {
        let [rows, cols] = a.shape;
        let _ = writeln!(text, "array {} {} {}", a.name, rows, cols);
        for row in a.values.chunks(cols.max(1)) {
            let mut first = true;
            for v in row {
                if !first {
                    text.push(' ');
                }
                first = false;
                let _ = write!(text, "{v}");
            }
            text.push('\n');
        }
    }
    text.push_str("end\n");
    out.write_all(text.as_bytes())
}

pub fn read_arrays<R: BufRead>(input: R) -> Result<Vec<NamedArray>, CheckpointError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let fail = |line: usize, reason: &str| CheckpointError::Format { line, reason: reason.into() };
    match lines.next() {
        Some((_, Ok(l))) if l.trim() == MAGIC => {}
        Some((_, Err(e))) => return Err(e.into()),
        _ => return Err(fail(1, "missing header")),
    }
    let mut arrays = Vec::new();
    loop {
        let (n, line) = lines.next().ok_or_else(|| fail(0, "missing end marker"))?;
        let line = line?;
        let line = line.trim();
        if line == "end" {
            return Ok(arrays);
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let ["array", name, rows, cols] = parts[..] else {
            return Err(fail(n, "expected `array <name> <rows> <cols>`"));
        };
        let rows: usize = rows.parse().map_err(|_| fail(n, "rows"))?;
        let cols: usize = cols.parse().map_err(|_| fail(n, "cols"))?;
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (m, row) = lines.next().ok_or_else(|| fail(n, "truncated array"))?;
            let row = row?;
            let before = values.len();
            for v in row.split_whitespace() {
                values.push(v.parse::<f64>().map_err(|_| fail(m, "value"))?);
            }
            if values.len() - before != cols {
                return Err(fail(m, "row width differs from header"));
            }
        }
        arrays.push(NamedArray { name: name.to_string(), shape: [rows, cols], values });
    }
}

fn collect(prefix: &str, named: [(&'static str, [usize; 2], &[f64]); 4]) -> Vec<NamedArray> {
    named
        .into_iter()
        .map(|(name, shape, values)| NamedArray { name: format!("{prefix}.{name}"), shape, values: values.to_vec() })
        .collect()
}

pub fn policy_arrays(net: &PolicyNet) -> Vec<NamedArray> {
    collect("policy", net.named_tensors())
}

pub fn value_arrays(net: &ValueNet) -> Vec<NamedArray> {
    collect("value", net.named_tensors())
}

pub fn agent_arrays(agent: &PolicyGradientAgent) -> Vec<NamedArray> {
    let mut arrays = policy_arrays(&agent.policy);
    arrays.extend(value_arrays(&agent.value));
    arrays
}

fn restore<P: Parameters>(
    prefix: &str,
    shapes: [(&'static str, [usize; 2], &[f64]); 4],
    target: &mut P,
    arrays: &[NamedArray],
) -> Result<(), CheckpointError> {
    let mut loaded = Vec::with_capacity(4);
    for (name, shape, _) in shapes {
        let full = format!("{prefix}.{name}");
        let a = arrays.iter().find(|a| a.name == full).ok_or_else(|| CheckpointError::Missing(full.clone()))?;
        if a.shape != shape {
            return Err(CheckpointError::Shape { name: full, expected: shape, found: a.shape });
        }
        loaded.push(a.values.clone());
    }
    for (dst, src) in target.tensors_mut().into_iter().zip(loaded) {
        dst.copy_from_slice(&src);
    }
    Ok(())
}

/// Overwrites the agent's network parameters. Shapes must match exactly;
/// optimiser state is not part of a checkpoint.
pub fn load_agent(agent: &mut PolicyGradientAgent, arrays: &[NamedArray]) -> Result<(), CheckpointError> {
    let policy_shapes = agent.policy.clone();
    restore("policy", policy_shapes.named_tensors(), &mut agent.policy, arrays)?;
    let value_shapes = agent.value.clone();
    restore("value", value_shapes.named_tensors(), &mut agent.value, arrays)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let arrays = vec![
            NamedArray { name: "a".into(), shape: [2, 3], values: vec![0.1, -2.5e-17, 3.0, 1e300, -0.0, 7.25] },
            NamedArray { name: "b".into(), shape: [1, 1], values: vec![std::f64::consts::PI] },
        ];
        let mut buf = Vec::new();
        write_arrays(&arrays, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ooi-checkpoint v1\narray a 2 3\n"));
        assert_eq!(read_arrays(&buf[..]).unwrap(), arrays);
    }

    #[test]
    fn rejects_bad_rows() {
        let text = "ooi-checkpoint v1\narray a 1 2\n1.0\nend\n";
        assert!(matches!(read_arrays(text.as_bytes()), Err(CheckpointError::Format { line: 3, .. })));
        assert!(read_arrays("nope\n".as_bytes()).is_err());
        assert!(read_arrays("ooi-checkpoint v1\n".as_bytes()).is_err());
    }
}
