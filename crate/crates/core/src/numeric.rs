//! Double-precision integration of t-dependent Lie systems and drift checks
//! for symbolic constants of motion.

use std::io::Write;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::diffgeo::VectorField;
use crate::symexpr::{q_f64, Chart, Poly, RationalExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("t-expression syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function or identifier `{0}`")]
    Unknown(String),
    #[error("pole encountered at t = {t}")]
    Pole { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("{got} values for {expected} slots")]
    Arity { expected: usize, got: usize },
    #[error("trajectories are sampled on different grids")]
    GridMismatch,
    #[error("no admissible sample after {0} draws")]
    SamplingExhausted(usize),
    #[error("invalid numeric option: {0}")]
    BadOption(String),
    #[error("csv output failed: {0}")]
    Io(String),
}

// t-dependent coefficients

#[derive(Clone, Debug, PartialEq)]
enum TNode {
    Num(f64),
    T,
    Neg(Box<TNode>),
    Add(Box<TNode>, Box<TNode>),
    Sub(Box<TNode>, Box<TNode>),
    Mul(Box<TNode>, Box<TNode>),
    Div(Box<TNode>, Box<TNode>),
    Pow(Box<TNode>, i32),
    Sin(Box<TNode>),
    Cos(Box<TNode>),
    Exp(Box<TNode>),
}

impl TNode {
    fn eval(&self, t: f64) -> f64 {
        match self {
            TNode::Num(x) => *x,
            TNode::T => t,
            TNode::Neg(a) => -a.eval(t),
            TNode::Add(a, b) => a.eval(t) + b.eval(t),
            TNode::Sub(a, b) => a.eval(t) - b.eval(t),
            TNode::Mul(a, b) => a.eval(t) * b.eval(t),
            TNode::Div(a, b) => a.eval(t) / b.eval(t),
            TNode::Pow(a, e) => a.eval(t).powi(*e),
            TNode::Sin(a) => a.eval(t).sin(),
            TNode::Cos(a) => a.eval(t).cos(),
            TNode::Exp(a) => a.eval(t).exp(),
        }
    }
}

/// Coefficient `b(t)` built from rationals, `t`, `+ - * / ^`, `sin`, `cos`, `exp`.
#[derive(Clone, Debug, PartialEq)]
pub struct TCoefficient {
    text: String,
    node: TNode,
}

impl TCoefficient {
    pub fn parse(text: &str) -> Result<Self, NumError> {
        let mut p = TParser { s: text.as_bytes(), pos: 0 };
        let node = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(TCoefficient { text: text.to_string(), node })
    }

    pub fn constant(x: f64) -> Self {
        TCoefficient { text: format!("{x}"), node: TNode::Num(x) }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Value at `t`; a non-finite result signals a pole.
    pub fn eval(&self, t: f64) -> Result<f64, NumError> {
        let v = self.node.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumError::Pole { t })
        }
    }
}

struct TParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl TParser<'_> {
    fn err(&self, msg: &str) -> NumError {
        NumError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<TNode, NumError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = TNode::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = TNode::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<TNode, NumError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = TNode::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = TNode::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<TNode, NumError> {
        if self.eat(b'-') {
            return Ok(TNode::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<TNode, NumError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let mut e: i32 = digits.parse().map_err(|_| self.err("expected integer exponent"))?;
        if neg {
            e = -e;
        }
        if paren && !self.eat(b')') {
            return Err(self.err("expected `)`"));
        }
        Ok(TNode::Pow(Box::new(base), e))
    }

    fn atom(&mut self) -> Result<TNode, NumError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                text.parse().map(TNode::Num).map_err(|_| NumError::Syntax { pos: start, msg: "bad number".into() })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                if name == "t" {
                    return Ok(TNode::T);
                }
                let f: fn(Box<TNode>) -> TNode = match name {
                    "sin" => TNode::Sin,
                    "cos" => TNode::Cos,
                    "exp" => TNode::Exp,
                    _ => return Err(NumError::Unknown(name.to_string())),
                };
                if !self.eat(b'(') {
                    return Err(self.err("expected `(` after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(f(Box::new(arg)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

// Compiled rational functions

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let exps = m.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                (q_f64(c), exps)
            })
            .collect();
        CompiledPoly { terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, exps)| exps.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e))).sum()
    }
}

/// A rational function prepared for fast repeated `f64` evaluation.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    num: CompiledPoly,
    den: Option<CompiledPoly>,
}

impl CompiledExpr {
    pub fn new(e: &RationalExpr) -> Self {
        let den = if e.denom().is_one() { None } else { Some(CompiledPoly::new(e.denom())) };
        CompiledExpr { num: CompiledPoly::new(e.numer()), den }
    }

    /// `None` at a pole or for non-finite values.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let n = self.num.eval(x);
        let v = match &self.den {
            None => n,
            Some(d) => {
                let d = d.eval(x);
                if d == 0.0 {
                    return None;
                }
                n / d
            }
        };
        v.is_finite().then_some(v)
    }
}

/// `ẋ = Σ_α b_α(t) X_α(x)` with numeric parameter values.
#[derive(Clone, Debug)]
pub struct NumericSystem {
    names: Vec<String>,
    dim: usize,
    fields: Vec<Vec<CompiledExpr>>,
    coeffs: Vec<TCoefficient>,
    constraints: Vec<CompiledExpr>,
    params: Vec<f64>,
}

impl NumericSystem {
    pub fn new(fields: &[VectorField], coeffs: Vec<TCoefficient>, params: Vec<f64>) -> Result<Self, NumError> {
        let chart = fields.first().ok_or(NumError::Arity { expected: 1, got: 0 })?.chart();
        if coeffs.len() != fields.len() {
            return Err(NumError::Arity { expected: fields.len(), got: coeffs.len() });
        }
        if params.len() != chart.params().len() {
            return Err(NumError::Arity { expected: chart.params().len(), got: params.len() });
        }
        Ok(NumericSystem {
            names: chart.names().to_vec(),
            dim: chart.dim(),
            fields: fields.iter().map(|f| f.coeffs().iter().map(CompiledExpr::new).collect()).collect(),
            coeffs,
            constraints: chart.constraints().iter().map(CompiledExpr::new).collect(),
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn point(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend_from_slice(&self.params);
        p
    }

    /// Whether `x` keeps every constraint at least `eps` away from zero.
    pub fn admissible(&self, x: &[f64], eps: f64) -> bool {
        let p = self.point(x);
        self.constraints.iter().all(|c| c.eval(&p).is_some_and(|v| v.abs() > eps))
    }

    /// Right-hand side at `(t, x)`.
    pub fn rhs(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, NumError> {
        let p = self.point(x);
        if !self.admissible(x, 0.0) {
            return Err(NumError::Pole { t });
        }
        let mut out = vec![0.0; self.dim];
        for (field, b) in self.fields.iter().zip(&self.coeffs) {
            let b = b.eval(t)?;
            if b == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(field) {
                *o += b * c.eval(&p).ok_or(NumError::Pole { t })?;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with error control; samples at accepted steps.
    Dopri5 { rtol: f64, atol: f64, h0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub method: Method,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("nonempty trajectory")
    }

    /// CSV with header `t,<coordinate names>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), NumError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| NumError::Io(e.to_string());
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.17e}")];
            row.extend(x.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| NumError::Io(e.to_string()))
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(sys: &NumericSystem, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>, NumError> {
    let k1 = sys.rhs(t, x)?;
    let k2 = sys.rhs(t + h / 2.0, &axpy(x, h / 2.0, &k1))?;
    let k3 = sys.rhs(t + h / 2.0, &axpy(x, h / 2.0, &k2))?;
    let k4 = sys.rhs(t + h, &axpy(x, h, &k3))?;
    Ok((0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn dopri_step(sys: &NumericSystem, t: f64, x: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>), NumError> {
    let n = x.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut xs = x.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = DP_A[s][j];
            if a != 0.0 {
                for i in 0..n {
                    xs[i] += h * a * kj[i];
                }
            }
        }
        k.push(sys.rhs(t + DP_C[s] * h, &xs)?);
    }
    let comb = |b: &[f64; 7]| -> Vec<f64> { (0..n).map(|i| x[i] + h * (0..7).map(|s| b[s] * k[s][i]).sum::<f64>()).collect() };
    Ok((comb(&DP_B5), comb(&DP_B4)))
}

/// Integrate from `t0` to `t1` (`t1 > t0`).
pub fn integrate(sys: &NumericSystem, x0: &[f64], t0: f64, t1: f64, method: Method) -> Result<Trajectory, NumError> {
    if x0.len() != sys.dim() {
        return Err(NumError::Arity { expected: sys.dim(), got: x0.len() });
    }
    if !(t1 > t0) {
        return Err(NumError::BadOption(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    if !sys.admissible(x0, 0.0) {
        return Err(NumError::Pole { t: t0 });
    }
    let mut times = vec![t0];
    let mut states = vec![x0.to_vec()];
    match method {
        Method::Rk4 { step } => {
            if !(step > 0.0) {
                return Err(NumError::BadOption(format!("step {step}")));
            }
            let n = ((t1 - t0) / step).round().max(1.0) as usize;
            let h = (t1 - t0) / n as f64;
            let mut x = x0.to_vec();
            for i in 0..n {
                let t = t0 + i as f64 * h;
                x = rk4_step(sys, t, &x, h)?;
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(NumError::Pole { t: t + h });
                }
                times.push(t0 + (i + 1) as f64 * h);
                states.push(x.clone());
            }
        }
        Method::Dopri5 { rtol, atol, h0 } => {
            if !(rtol > 0.0 && atol > 0.0 && h0 > 0.0) {
                return Err(NumError::BadOption("tolerances and h0 must be positive".into()));
            }
            let mut t = t0;
            let mut h = h0.min(t1 - t0);
            let mut x = x0.to_vec();
            let hmin = 1e-14 * (t1 - t0).abs().max(1.0);
            while t < t1 {
                if t + h > t1 {
                    h = t1 - t;
                }
                let attempt = dopri_step(sys, t, &x, h);
                let (x5, x4) = match attempt {
                    Ok(v) => v,
                    Err(NumError::Pole { .. }) if h > hmin => {
                        h /= 4.0;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let err = x5
                    .iter()
                    .zip(&x4)
                    .zip(&x)
                    .map(|((a, b), c)| {
                        let sc = atol + rtol * a.abs().max(c.abs());
                        ((a - b) / sc).powi(2)
                    })
                    .sum::<f64>()
                    / x.len() as f64;
                let err = err.sqrt();
                if err <= 1.0 && x5.iter().all(|v| v.is_finite()) {
                    t += h;
                    x = x5;
                    times.push(t);
                    states.push(x.clone());
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                if h < hmin && t < t1 {
                    return Err(NumError::StepUnderflow { t });
                }
            }
        }
    }
    Ok(Trajectory { names: sys.names().to_vec(), times, states, method })
}

fn joined_states(trajs: &[Trajectory], params: &[f64]) -> Result<Vec<(f64, Vec<f64>)>, NumError> {
    let first = trajs.first().ok_or(NumError::GridMismatch)?;
    if trajs.iter().any(|t| t.times.len() != first.times.len() || t.times.iter().zip(&first.times).any(|(a, b)| a != b)) {
        return Err(NumError::GridMismatch);
    }
    Ok((0..first.times.len())
        .map(|i| {
            let mut p: Vec<f64> = trajs.iter().flat_map(|t| t.states[i].iter().copied()).collect();
            p.extend_from_slice(params);
            (first.times[i], p)
        })
        .collect())
}

/// `max_t |f(t) − f(t₀)| / max(1, |f(t₀)|)` along the product trajectory.
pub fn drift(f: &RationalExpr, trajs: &[Trajectory], params: &[f64]) -> Result<f64, NumError> {
    let c = CompiledExpr::new(f);
    let pts = joined_states(trajs, params)?;
    let f0 = c.eval(&pts[0].1).ok_or(NumError::Pole { t: pts[0].0 })?;
    let mut worst: f64 = 0.0;
    for (t, p) in &pts {
        let v = c.eval(p).ok_or(NumError::Pole { t: *t })?;
        worst = worst.max((v - f0).abs());
    }
    Ok(worst / f0.abs().max(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub name: String,
    pub initial: Option<f64>,
    /// Relative deviation from the initial value; `None` when a pole was hit.
    pub deviation: Option<f64>,
    pub pole_at: Option<f64>,
}

/// Evaluate each relation `Υ_i` along `(probe, particulars…)` and report its
/// deviation from the initial value. Poles are reported, not raised.
pub fn verify_superposition(relations: &[(String, RationalExpr)], trajs: &[Trajectory], params: &[f64]) -> Result<Vec<RelationCheck>, NumError> {
    let pts = joined_states(trajs, params)?;
    Ok(relations
        .iter()
        .map(|(name, f)| {
            let c = CompiledExpr::new(f);
            let mut check = RelationCheck { name: name.clone(), initial: None, deviation: None, pole_at: None };
            let mut f0 = None;
            let mut worst: f64 = 0.0;
            for (t, p) in &pts {
                match c.eval(p) {
                    Some(v) => {
                        let base = *f0.get_or_insert(v);
                        worst = worst.max((v - base).abs());
                    }
                    None => {
                        check.pole_at = Some(*t);
                        return check;
                    }
                }
            }
            check.initial = f0;
            check.deviation = f0.map(|b| worst / b.abs().max(1.0));
            check
        })
        .collect())
}

/// Uniform draw from `bounds` rejecting points within `eps` of a constraint's zero set.
pub fn sample_generic<R: Rng>(
    chart: &Chart,
    bounds: &[(f64, f64)],
    params: &[f64],
    eps: f64,
    rng: &mut R,
) -> Result<Vec<f64>, NumError> {
    if bounds.len() != chart.dim() {
        return Err(NumError::Arity { expected: chart.dim(), got: bounds.len() });
    }
    let constraints: Vec<CompiledExpr> = chart.constraints().iter().map(CompiledExpr::new).collect();
    const TRIES: usize = 10_000;
    for _ in 0..TRIES {
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..hi) }).collect();
        let mut p = x.clone();
        p.extend_from_slice(params);
        if constraints.iter().all(|c| c.eval(&p).is_some_and(|v| v.abs() > eps)) {
            return Ok(x);
        }
    }
    Err(NumError::SamplingExhausted(TRIES))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::symexpr::parse;

    #[test]
    fn t_expressions() {
        let c = TCoefficient::parse("2*sin(t)^2 + cos(t)^(2) - t/4 + exp(0)").unwrap();
        let t = 0.3_f64;
        assert!((c.eval(t).unwrap() - (2.0 * t.sin().powi(2) + t.cos().powi(2) - t / 4.0 + 1.0)).abs() < 1e-15);
        assert_eq!(TCoefficient::parse("1.5").unwrap().eval(9.0).unwrap(), 1.5);
        assert_eq!(TCoefficient::parse("tan(t)"), Err(NumError::Unknown("tan".into())));
        assert!(matches!(TCoefficient::parse("1 +"), Err(NumError::Syntax { .. })));
        assert!(matches!(TCoefficient::parse("1/t").unwrap().eval(0.0), Err(NumError::Pole { .. })));
    }

    #[test]
    fn zero_field_is_constant() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let sys = NumericSystem::new(&[VectorField::zero(c)], vec![TCoefficient::constant(1.0)], vec![]).unwrap();
        let tr = integrate(&sys, &[1.0, 2.0], 0.0, 1.0, Method::Rk4 { step: 0.1 }).unwrap();
        assert_eq!(tr.times.len(), 11);
        assert_eq!(tr.last(), &[1.0, 2.0]);
    }

    #[test]
    fn exponential_growth_matches() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let f = VectorField::parse(c.clone(), &["x"]).unwrap();
        let sys = NumericSystem::new(&[f], vec![TCoefficient::parse("1").unwrap()], vec![]).unwrap();
        let rk = integrate(&sys, &[1.0], 0.0, 1.0, Method::Rk4 { step: 1e-2 }).unwrap();
        assert!((rk.last()[0] - 1f64.exp()).abs() < 1e-9);
        let dp = integrate(&sys, &[1.0], 0.0, 1.0, Method::Dopri5 { rtol: 1e-10, atol: 1e-12, h0: 1e-3 }).unwrap();
        assert!((dp.last()[0] - 1f64.exp()).abs() < 1e-8);
        assert_eq!(*dp.times.last().unwrap(), 1.0);
        let one = parse("1", &c).unwrap();
        assert_eq!(drift(&one, &[rk], &[]).unwrap(), 0.0);
    }

    #[test]
    fn pole_is_reported() {
        let c = Arc::new(Chart::new(&["x"]).unwrap().with_constraints(&["x"]).unwrap());
        let f = VectorField::parse(c, &["-1"]).unwrap();
        let sys = NumericSystem::new(&[f], vec![TCoefficient::constant(1.0)], vec![]).unwrap();
        assert!(matches!(integrate(&sys, &[0.5], 0.0, 1.0, Method::Rk4 { step: 0.25 }), Err(NumError::Pole { .. })));
    }

    #[test]
    fn csv_header() {
        let tr = Trajectory { names: vec!["x".into()], times: vec![0.0], states: vec![vec![1.0]], method: Method::Rk4 { step: 1.0 } };
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,x\n"));
    }
}
