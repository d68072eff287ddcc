//! Strip-packing instances: N rectangles in a strip of fixed height,
//! minimizing the used length.

use std::fmt::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::frontend::{parse_named, Problem};
use crate::{ArithModel, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    Lra,
    Lira,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Lra => "lra",
            Encoding::Lira => "lira",
        })
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lra" => Ok(Encoding::Lra),
            "lira" => Ok(Encoding::Lira),
            other => Err(Error::Config(format!("unknown encoding `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpInstance {
    pub n: usize,
    pub strip_height: Rational,
    pub widths: Vec<Rational>,
    pub heights: Vec<Rational>,
    /// Per rectangle: are its coordinates integer.
    pub integer: Vec<bool>,
    pub encoding: Encoding,
    pub seed: u64,
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `√n` rounded to three decimals, halved.
pub fn strip_height(n: usize) -> Rational {
    let scaled = 1_000_000u64 * n as u64;
    let mut r = scaled.sqrt();
    // round half up: (r + ½)² ≤ scaled ⇔ (2r + 1)² ≤ 4·scaled
    if (2 * r + 1) * (2 * r + 1) <= 4 * scaled {
        r += 1;
    }
    Rational::new(BigInt::from(r), BigInt::from(2000))
}

fn name(prefix: &str, n: usize, seed: u64, encoding: Encoding) -> String {
    format!("{prefix}-n{n}-s{seed}-{encoding}")
}

impl SpInstance {
    /// Sample widths in (1, 2] and heights in (0, 1] as multiples of 1/1000,
    /// resampling any height above the strip.
    pub fn sample(n: usize, seed: u64, encoding: Encoding) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("strip packing needs at least one rectangle".into()));
        }
        let mut rng = SplitMix64::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ n as u64);
        let strip_height = strip_height(n);
        let (mut widths, mut heights, mut integer) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n {
            widths.push(q(rng.gen_range(1001..=2000), 1000));
            let h = loop {
                let h = q(rng.gen_range(1..=1000), 1000);
                if h <= strip_height {
                    break h;
                }
            };
            heights.push(h);
            integer.push(encoding == Encoding::Lira && rng.gen_bool(0.5));
        }
        Ok(SpInstance { n, strip_height, widths, heights, integer, encoding, seed })
    }

    pub fn name(&self) -> String {
        name("sp", self.n, self.seed, self.encoding)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        writeln!(w, "; strip packing, {} rectangles, seed {}, {} encoding", self.n, self.seed, self.encoding).unwrap();
        writeln!(w, "; strip height {} (sqrt(N) to 3 decimals, halved)", self.strip_height).unwrap();
        for i in 0..self.n {
            writeln!(w, "; rect {i}: width {} height {}", self.widths[i], self.heights[i]).unwrap();
        }
        let logic = if self.integer.iter().any(|b| *b) { "QF_LIRA" } else { "QF_LRA" };
        writeln!(w, "(set-logic {logic})").unwrap();
        for i in 0..self.n {
            let sort = if self.integer[i] { "Int" } else { "Real" };
            writeln!(w, "(declare-const x{i} {sort})").unwrap();
            writeln!(w, "(declare-const y{i} {sort})").unwrap();
        }
        writeln!(w, "(declare-const L Real)").unwrap();
        let r = |v: &Rational| format!("(/ {} {})", v.numer(), v.denom());
        let h = r(&self.strip_height);
        for i in 0..self.n {
            let (wi, hi) = (r(&self.widths[i]), r(&self.heights[i]));
            writeln!(w, "(assert (>= x{i} 0))").unwrap();
            writeln!(w, "(assert (>= y{i} 0))").unwrap();
            writeln!(w, "(assert (<= (+ y{i} {hi}) {h}))").unwrap();
            writeln!(w, "(assert (<= (+ x{i} {wi}) L))").unwrap();
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (wi, hi, wj, hj) = (r(&self.widths[i]), r(&self.heights[i]), r(&self.widths[j]), r(&self.heights[j]));
                writeln!(
                    w,
                    "(assert (or (<= (+ x{i} {wi}) x{j}) (<= (+ x{j} {wj}) x{i}) (<= (+ y{i} {hi}) y{j}) (<= (+ y{j} {hj}) y{i})))"
                )
                .unwrap();
            }
        }
        writeln!(w, "(minimize L)").unwrap();
        writeln!(w, "(check-sat)").unwrap();
        s
    }

    pub fn to_problem(&self) -> Result<Problem> {
        parse_named(&self.to_text(), &self.name())
    }

    /// All rectangles in a row on the floor, integer positions rounded up.
    pub fn row_placement(&self, p: &Problem) -> ArithModel {
        let mut model = ArithModel::new();
        let mut x = Rational::from_integer(0.into());
        for i in 0..self.n {
            if self.integer[i] {
                x = x.ceil();
            }
            model.set(p.var(&format!("x{i}")).unwrap(), x.clone());
            model.set(p.var(&format!("y{i}")).unwrap(), Rational::from_integer(0.into()));
            x += &self.widths[i];
        }
        model.set(p.var("L").unwrap(), x);
        model
    }
}

/// Sample, render and parse an instance, checking that the row placement is
/// a model.
pub fn generate_sp(n: usize, seed: u64, encoding: Encoding) -> Result<(String, Problem, SpInstance)> {
    let inst = SpInstance::sample(n, seed, encoding)?;
    let text = inst.to_text();
    let problem = parse_named(&text, &inst.name())?;
    let model = inst.row_placement(&problem);
    assert!(problem.satisfied_by(&model)?, "row placement must be feasible");
    Ok((text, problem, inst))
}
