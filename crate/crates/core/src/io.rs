//! CSV and plain-text outputs. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::eigen::EigenResult;
use crate::error::{Error, Result};
use crate::pde::Trajectory;
use crate::steady::{IterationTrace, PeriodicSolution};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_with(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_with(path, |w| w.write_all(text.as_bytes()))
}

/// `t,x,u,v,post_impulse`, one row per node per snapshot.
pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<()> {
    let nodes = tr.grid.nodes();
    write_with(path, |w| {
        writeln!(w, "t,x,u,v,post_impulse")?;
        for s in &tr.snapshots {
            let t = fmt_float(s.t);
            for (j, x) in nodes.iter().enumerate() {
                writeln!(
                    w,
                    "{t},{},{},{},{}",
                    fmt_float(*x),
                    fmt_float(s.u[j]),
                    fmt_float(s.v[j]),
                    u8::from(s.post_impulse)
                )?;
            }
        }
        Ok(())
    })
}

/// `t,sup_u,sup_v`, one row per snapshot.
pub fn write_summary(path: &Path, tr: &Trajectory) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "t,sup_u,sup_v")?;
        for s in &tr.summary {
            writeln!(w, "{},{},{}", fmt_float(s.t), fmt_float(s.sup_u), fmt_float(s.sup_v))?;
        }
        Ok(())
    })
}

/// `method,lambda1,multiplier,iterations,residual`.
pub fn write_eigen_rows(path: &Path, rows: &[EigenResult]) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "method,lambda1,multiplier,iterations,residual")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.method.name(),
                fmt_float(r.lambda1),
                fmt_float(r.multiplier),
                r.iterations,
                fmt_float(r.residual)
            )?;
        }
        Ok(())
    })
}

/// `x,phi,psi` at `t = 0⁺`.
pub fn write_eigenfunction(path: &Path, e: &EigenResult) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "x,phi,psi")?;
        for ((x, phi), psi) in e.nodes.iter().zip(&e.phi).zip(&e.psi) {
            writeln!(w, "{},{},{}", fmt_float(*x), fmt_float(*phi), fmt_float(*psi))?;
        }
        Ok(())
    })
}

/// `t,x,U,V` every `stride` levels; the levels `0⁺` and `τ` are always written.
pub fn write_periodic_solution(path: &Path, sol: &PeriodicSolution, stride: usize) -> Result<()> {
    let nodes = sol.grid.nodes();
    let steps = sol.steps();
    let stride = stride.max(1);
    write_with(path, |w| {
        writeln!(w, "t,x,U,V")?;
        for k in (0..=steps).filter(|k| k % stride == 0 || *k == steps) {
            let t = fmt_float(sol.time(k));
            for (j, x) in nodes.iter().enumerate() {
                writeln!(
                    w,
                    "{t},{},{},{}",
                    fmt_float(*x),
                    fmt_float(sol.orbit.u(k)[j]),
                    fmt_float(sol.orbit.v(k)[j])
                )?;
            }
        }
        Ok(())
    })
}

/// `iter,sup_u,sup_v,diff`; row 0 is the seed.
pub fn write_trace(path: &Path, trace: &IterationTrace) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "iter,sup_u,sup_v,diff")?;
        for (i, ((su, sv), d)) in trace.sup_u.iter().zip(&trace.sup_v).zip(&trace.diff).enumerate() {
            writeln!(w, "{i},{},{},{}", fmt_float(*su), fmt_float(*sv), fmt_float(*d))?;
        }
        Ok(())
    })
}

/// `value,lambda1`; failed points are written as `nan`.
pub fn write_sweep(path: &Path, rows: &[(f64, Option<f64>)]) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "value,lambda1")?;
        for (v, l) in rows {
            let l = l.map(fmt_float).unwrap_or_else(|| "nan".into());
            writeln!(w, "{},{l}", fmt_float(*v))?;
        }
        Ok(())
    })
}
