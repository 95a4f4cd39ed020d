use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimator::Diagnostics;
use crate::geometry::Vec2;
use crate::sim::{Sample, Trajectory, TrajectoryMeta};

/// Column order of trajectory files.
pub const COLUMNS: [&str; 18] = [
    "t", "y_x", "y_y", "x_x", "x_y", "xhat_x", "xhat_y", "xi_x", "xi_y", "d", "dhat", "delta",
    "varrho", "xtilde_norm", "u_x", "u_y", "theta", "flags",
];

fn fmt(x: f64) -> String {
    // shortest round-trip form, independent of locale
    format!("{x:e}")
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for s in &traj.samples {
        let mut row: Vec<String> = [
            s.t, s.agent.x, s.agent.y, s.target.x, s.target.y, s.x_hat.x, s.x_hat.y, s.xi.x,
            s.xi.y, s.d, s.d_hat, s.delta, s.varrho, s.xtilde_norm, s.u.x, s.u.y, s.theta,
        ]
        .into_iter()
        .map(fmt)
        .collect();
        row.push(s.flags.bits().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a trajectory file. Regressor columns are not stored, so samples come
/// back without them.
pub fn read_trajectory<R: Read>(input: R, meta: TrajectoryMeta) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::TrajectoryFormat(format!(
            "expected header {}, found {}",
            COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|_| {
                Error::TrajectoryFormat(format!("row {}: bad {} value {:?}", line + 1, COLUMNS[i], &rec[i]))
            })
        };
        let flags: u32 = rec[17]
            .trim()
            .parse()
            .map_err(|_| Error::TrajectoryFormat(format!("row {}: bad flags {:?}", line + 1, &rec[17])))?;
        samples.push(Sample {
            t: num(0)?,
            agent: Vec2::new(num(1)?, num(2)?),
            target: Vec2::new(num(3)?, num(4)?),
            x_hat: Vec2::new(num(5)?, num(6)?),
            xi: Vec2::new(num(7)?, num(8)?),
            d: num(9)?,
            d_hat: num(10)?,
            delta: num(11)?,
            varrho: num(12)?,
            xtilde_norm: num(13)?,
            u: Vec2::new(num(14)?, num(15)?),
            theta: num(16)?,
            flags: Diagnostics::from_bits_retain(flags),
            regressors: None,
        });
    }
    Ok(Trajectory {
        meta,
        samples,
        abort: None,
    })
}
