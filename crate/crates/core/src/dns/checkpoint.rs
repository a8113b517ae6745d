//! Plain-text checkpoints.
//!
//! ```text
//! thermoflow-state v1
//! alpha <f64> m_max <usize> n_max <usize> t <f64>
//! v <m> <n> <re> <im>
//! ...
//! theta <m> <n> <re> <im>
//! ...
//! history dt <f64>
//! prev_v <m> <n> <re> <im>
//! ...
//! prev_theta <m> <n> <re> <im>
//! ...
//! ```
//!
//! The `history` block is optional. It holds the explicit tendencies of the
//! last step so that a resumed run continues the Adams-Bashforth recursion
//! instead of restarting it. Floats use the shortest round-trip
//! representation, so reloading is bit exact.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array2;

use super::state::{SpectralState, C64};
use crate::error::{Error, Result};

pub const CHECKPOINT_HEADER: &str = "thermoflow-state v1";

/// Explicit tendencies of the most recent step and the step size used.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub dt: f64,
    pub v: Array2<C64>,
    pub theta: Array2<C64>,
}

/// A state together with the optional time-stepping history.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: SpectralState,
    pub history: Option<History>,
}

fn write_field(w: &mut impl Write, name: &str, s: &SpectralState, field: &Array2<C64>) -> Result<()> {
    for (i, m, _) in s.wavenumbers() {
        for n in 0..=s.n_max() {
            let c = field[[i, n]];
            writeln!(w, "{name} {m} {n} {:e} {:e}", c.re, c.im)?;
        }
    }
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Checkpoint(format!("line {line}: {}", msg.into()))
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(line, format!("missing or malformed {what}")))
}

impl Checkpoint {
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        let s = &self.state;
        writeln!(w, "{CHECKPOINT_HEADER}")?;
        writeln!(
            w,
            "alpha {:e} m_max {} n_max {} t {:e}",
            s.alpha(),
            s.m_max(),
            s.n_max(),
            s.t
        )?;
        write_field(&mut w, "v", s, &s.v_hat)?;
        write_field(&mut w, "theta", s, &s.theta_hat)?;
        if let Some(h) = &self.history {
            writeln!(w, "history dt {:e}", h.dt)?;
            write_field(&mut w, "prev_v", s, &h.v)?;
            write_field(&mut w, "prev_theta", s, &h.theta)?;
        }
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = || -> Result<Option<(usize, String)>> {
            match lines.next() {
                Some((i, l)) => Ok(Some((i + 1, l?))),
                None => Ok(None),
            }
        };
        match next()? {
            Some((_, h)) if h.trim() == CHECKPOINT_HEADER => {}
            Some((_, h)) => return Err(bad(1, format!("unsupported header '{h}'"))),
            None => return Err(bad(1, "empty checkpoint")),
        }
        let (ln, meta) = next()?.ok_or_else(|| bad(2, "missing size line"))?;
        let toks: Vec<&str> = meta.split_whitespace().collect();
        if toks.len() != 8 || toks[0] != "alpha" || toks[2] != "m_max" || toks[4] != "n_max" || toks[6] != "t" {
            return Err(bad(ln, "expected 'alpha A m_max M n_max N t T'"));
        }
        let alpha: f64 = parse(Some(toks[1]), ln, "alpha")?;
        let m_max: usize = parse(Some(toks[3]), ln, "m_max")?;
        let n_max: usize = parse(Some(toks[5]), ln, "n_max")?;
        let mut s = SpectralState::zeros(m_max, n_max, alpha)?;
        s.t = parse(Some(toks[7]), ln, "t")?;
        let mut history: Option<History> = None;
        while let Some((ln, line)) = next()? {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let name = it.next().unwrap_or_default().to_string();
            if name == "history" {
                if history.is_some() || it.next() != Some("dt") {
                    return Err(bad(ln, "expected a single 'history dt DT' line"));
                }
                let dt: f64 = parse(it.next(), ln, "dt")?;
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(bad(ln, "history step must be positive"));
                }
                let zeros = Array2::zeros(s.v_hat.dim());
                history = Some(History {
                    dt,
                    v: zeros.clone(),
                    theta: zeros,
                });
                continue;
            }
            let m: i64 = parse(it.next(), ln, "m")?;
            let n: usize = parse(it.next(), ln, "n")?;
            let c = C64::new(parse(it.next(), ln, "re")?, parse(it.next(), ln, "im")?);
            if !s.contains_mode(m, n) {
                return Err(bad(ln, format!("mode ({m}, {n}) outside the declared truncation")));
            }
            let i = s.row(m);
            let target = match (name.as_str(), history.as_mut()) {
                ("v", None) => &mut s.v_hat,
                ("theta", None) => &mut s.theta_hat,
                ("prev_v", Some(h)) => &mut h.v,
                ("prev_theta", Some(h)) => &mut h.theta,
                (other, _) => return Err(bad(ln, format!("unexpected field '{other}'"))),
            };
            target[[i, n]] = c;
        }
        if !s.invariants_hold() {
            return Err(Error::Checkpoint("coefficients violate the state invariants".into()));
        }
        if let Some(h) = &history {
            if h.v
                .iter()
                .chain(&h.theta)
                .any(|c| !c.re.is_finite() || !c.im.is_finite())
            {
                return Err(Error::Checkpoint("non-finite history coefficients".into()));
            }
        }
        Ok(Self { state: s, history })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}

/// Writes a state without history.
pub fn write_checkpoint(s: &SpectralState, w: impl Write) -> Result<()> {
    Checkpoint {
        state: s.clone(),
        history: None,
    }
    .write(w)
}

/// Reads the state of a checkpoint, discarding any history.
pub fn read_checkpoint(r: impl BufRead) -> Result<SpectralState> {
    Checkpoint::read(r).map(|c| c.state)
}

pub fn save_checkpoint(s: &SpectralState, path: impl AsRef<Path>) -> Result<()> {
    Checkpoint {
        state: s.clone(),
        history: None,
    }
    .save(path)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<SpectralState> {
    Checkpoint::load(path).map(|c| c.state)
}
