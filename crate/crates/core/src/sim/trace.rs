use super::SimError;
use crate::Real;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T: Real> {
    pub t: T,
    pub x: DVector<T>,
    pub y: T,
    pub u1: T,
    pub u2: T,
    pub u: T,
    pub d: T,
}

/// Sampled closed-loop record; row `k` holds `x[k]` and the inputs applied
/// over `[k·Ts, (k+1)·Ts)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T: Real> {
    pub ts: f64,
    pub rows: Vec<TraceRow<T>>,
    /// Seeds and controller identifiers; not part of the CSV.
    pub metadata: BTreeMap<String, String>,
}

impl<T: Real> SimTrace<T> {
    pub fn new(ts: f64) -> Self {
        Self {
            ts,
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_x(&self) -> usize {
        self.rows.first().map_or(0, |r| r.x.len())
    }

    pub fn column(&self, f: impl Fn(&TraceRow<T>) -> T) -> Vec<T> {
        self.rows.iter().map(f).collect()
    }

    pub fn y(&self) -> Vec<T> {
        self.column(|r| r.y)
    }

    pub fn u2(&self) -> Vec<T> {
        self.column(|r| r.u2)
    }

    pub fn d(&self) -> Vec<T> {
        self.column(|r| r.d)
    }

    /// `(y, u₁, u₂)` as time-major single-column matrices.
    pub fn io_matrices(&self) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
        let col = |v: Vec<T>| DMatrix::from_vec(v.len(), 1, v);
        (col(self.y()), col(self.column(|r| r.u1)), col(self.u2()))
    }

    pub fn header(n_x: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=n_x).map(|i| format!("x{i}")));
        h.extend(["y", "u1", "u2", "u", "d"].map(String::from));
        h
    }

    /// Header `t,x1,…,xn,y,u1,u2,u,d`; numbers use the shortest form that
    /// parses back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let n_x = if self.rows.is_empty() { 3 } else { self.n_x() };
        w.write_record(Self::header(n_x))?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string()];
            rec.extend(r.x.iter().map(|v| v.to_string()));
            rec.extend([r.y, r.u1, r.u2, r.u, r.d].iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| SimError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

impl SimTrace<f64> {
    /// Parses a trace written by [`SimTrace::write_csv`]; `ts` is taken from
    /// the first two time stamps (0.0 for a single row).
    pub fn read_csv<R: Read>(input: R) -> Result<Self, SimError> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        let n_x = header
            .len()
            .checked_sub(6)
            .filter(|&n| n > 0)
            .ok_or_else(|| SimError::Csv("too few columns".into()))?;
        if header != Self::header(n_x) {
            return Err(SimError::Csv(format!("unexpected header {header:?}")));
        }
        let mut trace = SimTrace::new(0.0);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| SimError::Csv(format!("row {}: {e}", i + 2)))?;
            trace.rows.push(TraceRow {
                t: vals[0],
                x: DVector::from_column_slice(&vals[1..=n_x]),
                y: vals[n_x + 1],
                u1: vals[n_x + 2],
                u2: vals[n_x + 3],
                u: vals[n_x + 4],
                d: vals[n_x + 5],
            });
        }
        if trace.rows.len() >= 2 {
            trace.ts = trace.rows[1].t - trace.rows[0].t;
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SimTrace<f64> {
        let mut t = SimTrace::new(0.1);
        for k in 0..3 {
            let x = DVector::from_column_slice(&[0.1 * k as f64, 1.0 / 3.0, -2e-17]);
            t.rows.push(TraceRow {
                t: 0.1 * k as f64,
                y: x[0],
                x,
                u1: -0.7,
                u2: 0.1,
                u: -0.6,
                d: std::f64::consts::PI,
            });
        }
        t
    }

    #[test]
    fn header_is_fixed() {
        let text = sample().to_csv_string();
        assert!(text.starts_with("t,x1,x2,x3,y,u1,u2,u,d\n"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let back = SimTrace::read_csv(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.ts, 0.1);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(SimTrace::read_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
