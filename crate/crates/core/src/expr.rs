//! Scalar-field expressions with exact derivatives.
//!
//! An [`Expr`] is an immutable DAG built from constants, coordinate
//! variables and a small set of combinators. Expressions can be
//!
//! * evaluated on any [`Scalar`] (plain `f64` or a second-order [`Jet`]),
//! * differentiated symbolically ([`Expr::diff`]),
//! * composed with other expressions ([`Expr::substitute`]).
//!
//! Evaluation goes through a compiled [`Tape`] in which shared sub-trees
//! are evaluated once.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

#[derive(Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Powf(Expr, f64),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Sqrt(Expr),
}

/// A shared, immutable scalar expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "v{i}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Powi(a, k) => write!(f, "{a}^{k}"),
            Node::Powf(a, q) => write!(f, "{a}^{q}"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn var(index: usize) -> Self {
        Self::new(Node::Var(index))
    }

    /// Variables `0..n`.
    pub fn vars(n: usize) -> Vec<Self> {
        (0..n).map(Self::var).collect()
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn powi(&self, k: i32) -> Self {
        match k {
            0 => Self::one(),
            1 => self.clone(),
            _ => Self::new(Node::Powi(self.clone(), k)),
        }
    }

    pub fn powf(&self, q: f64) -> Self {
        Self::new(Node::Powf(self.clone(), q))
    }

    pub fn sin(&self) -> Self {
        Self::new(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Self::new(Node::Cos(self.clone()))
    }

    pub fn exp(&self) -> Self {
        Self::new(Node::Exp(self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Self::new(Node::Sqrt(self.clone()))
    }

    /// `Some(c)` when the expression is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Largest variable index referenced, plus one.
    pub fn arity(&self) -> usize {
        let tape = Tape::compile(self);
        tape.arity
    }

    /// Sum of a list of expressions (zero for an empty list).
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Self {
        let mut memo = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    fn diff_memo(&self, var: usize, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff_memo(var, memo) + b.diff_memo(var, memo),
            Node::Mul(a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                da * b.clone() + a.clone() * db
            }
            Node::Neg(a) => -a.diff_memo(var, memo),
            Node::Powi(a, k) => {
                let da = a.diff_memo(var, memo);
                Expr::constant(*k as f64) * a.powi(k - 1) * da
            }
            Node::Powf(a, q) => {
                let da = a.diff_memo(var, memo);
                Expr::constant(*q) * a.powf(q - 1.0) * da
            }
            Node::Sin(a) => a.cos() * a.diff_memo(var, memo),
            Node::Cos(a) => -(a.sin() * a.diff_memo(var, memo)),
            Node::Exp(a) => self.clone() * a.diff_memo(var, memo),
            Node::Sqrt(a) => {
                let da = a.diff_memo(var, memo);
                Expr::constant(0.5) * da / self.clone()
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Replace every `Var(i)` by `values[i]`.
    ///
    /// Panics if a referenced variable has no replacement.
    pub fn substitute(&self, values: &[Expr]) -> Self {
        let mut memo = HashMap::new();
        self.subst_memo(values, &mut memo)
    }

    fn subst_memo(&self, values: &[Expr], memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.key()) {
            return e.clone();
        }
        let e = match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(i) => values.get(*i).unwrap_or_else(|| panic!("no substitute for variable {i}")).clone(),
            Node::Add(a, b) => a.subst_memo(values, memo) + b.subst_memo(values, memo),
            Node::Mul(a, b) => a.subst_memo(values, memo) * b.subst_memo(values, memo),
            Node::Neg(a) => -a.subst_memo(values, memo),
            Node::Powi(a, k) => a.subst_memo(values, memo).powi(*k),
            Node::Powf(a, q) => a.subst_memo(values, memo).powf(*q),
            Node::Sin(a) => a.subst_memo(values, memo).sin(),
            Node::Cos(a) => a.subst_memo(values, memo).cos(),
            Node::Exp(a) => a.subst_memo(values, memo).exp(),
            Node::Sqrt(a) => a.subst_memo(values, memo).sqrt(),
        };
        memo.insert(self.key(), e.clone());
        e
    }

    /// Evaluate at a point given as plain numbers.
    pub fn eval(&self, point: &[f64]) -> f64 {
        Tape::compile(self).eval(point)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            _ => Expr::new(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(1.0), _) => rhs,
            (_, Some(1.0)) => self,
            _ => Expr::new(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        self * rhs.powi(-1)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expr::new(Node::Neg(self)),
        }
    }
}

macro_rules! scalar_rhs {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr { $tr::$m(self, Expr::constant(rhs)) }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { $tr::$m(Expr::constant(self), rhs) }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { $tr::$m(self.clone(), rhs.clone()) }
        }
    )*};
}
scalar_rhs!(Add add, Sub sub, Mul mul, Div div);

/// Numeric type an expression can be evaluated on.
pub trait Scalar: Clone {
    /// Constant with the same shape (number of tracked variables) as `like`.
    fn constant_like(c: f64, like: &Self) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Apply a scalar function given its value and first two derivatives.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self;
}

impl Scalar for f64 {
    fn constant_like(c: f64, _: &Self) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f: f64, _: f64, _: f64) -> Self {
        f
    }
}

/// Second-order forward-mode jet: value, gradient and Hessian in `n`
/// variables. The Hessian is stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn constant(c: f64, n: usize) -> Self {
        Jet { value: c, grad: vec![0.0; n], hess: vec![0.0; n * n] }
    }

    /// Independent variable `index` out of `n`, at `value`.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut j = Self::constant(value, n);
        j.grad[index] = 1.0;
        j
    }

    /// Seed jets for all coordinates of a point.
    pub fn seed(point: &[f64]) -> Vec<Jet> {
        let n = point.len();
        point.iter().enumerate().map(|(i, &x)| Self::variable(x, i, n)).collect()
    }

    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.nvars() + j]
    }
}

impl Scalar for Jet {
    fn constant_like(c: f64, like: &Self) -> Self {
        Jet::constant(c, like.nvars())
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn add(&self, rhs: &Self) -> Self {
        Jet {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let n = self.nvars();
        let (a, b) = (self.value, rhs.value);
        let grad = (0..n).map(|i| a * rhs.grad[i] + b * self.grad[i]).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess[k] = a * rhs.hess[k] + b * self.hess[k] + self.grad[i] * rhs.grad[j] + rhs.grad[i] * self.grad[j];
            }
        }
        Jet { value: a * b, grad, hess }
    }

    fn neg(&self) -> Self {
        Jet {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.nvars();
        let grad = self.grad.iter().map(|g| df * g).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess[k] = df * self.hess[k] + d2f * self.grad[i] * self.grad[j];
            }
        }
        Jet { value: f, grad, hess }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Mul(usize, usize),
    Neg(usize),
    Powi(usize, i32),
    Powf(usize, f64),
    Sin(usize),
    Cos(usize),
    Exp(usize),
    Sqrt(usize),
}

/// Linearised expression DAG, evaluated in topological order.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    arity: usize,
}

impl Tape {
    pub fn compile(expr: &Expr) -> Self {
        let mut ops = Vec::new();
        let mut index = HashMap::new();
        let mut arity = 0;
        // iterative post-order walk; deep sums would overflow a recursive one
        let mut stack: Vec<(Expr, bool)> = vec![(expr.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if index.contains_key(&e.key()) {
                continue;
            }
            let children: Vec<&Expr> = match &*e.0 {
                Node::Const(_) | Node::Var(_) => vec![],
                Node::Add(a, b) | Node::Mul(a, b) => vec![a, b],
                Node::Neg(a)
                | Node::Powi(a, _)
                | Node::Powf(a, _)
                | Node::Sin(a)
                | Node::Cos(a)
                | Node::Exp(a)
                | Node::Sqrt(a) => vec![a],
            };
            if !expanded && children.iter().any(|c| !index.contains_key(&c.key())) {
                stack.push((e.clone(), true));
                for c in children {
                    if !index.contains_key(&c.key()) {
                        stack.push((c.clone(), false));
                    }
                }
                continue;
            }
            let at = |c: &Expr| index[&c.key()];
            let op = match &*e.0 {
                Node::Const(c) => Op::Const(*c),
                Node::Var(i) => {
                    arity = arity.max(i + 1);
                    Op::Var(*i)
                }
                Node::Add(a, b) => Op::Add(at(a), at(b)),
                Node::Mul(a, b) => Op::Mul(at(a), at(b)),
                Node::Neg(a) => Op::Neg(at(a)),
                Node::Powi(a, k) => Op::Powi(at(a), *k),
                Node::Powf(a, q) => Op::Powf(at(a), *q),
                Node::Sin(a) => Op::Sin(at(a)),
                Node::Cos(a) => Op::Cos(at(a)),
                Node::Exp(a) => Op::Exp(at(a)),
                Node::Sqrt(a) => Op::Sqrt(at(a)),
            };
            index.insert(e.key(), ops.len());
            ops.push(op);
        }
        Tape { ops, arity }
    }

    /// Number of variables the expression reads.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.eval_scalar(point)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn jet(&self, point: &[f64]) -> Jet {
        self.eval_scalar(&Jet::seed(point))
    }

    /// Evaluate on arbitrary scalars. `inputs` must cover every variable.
    pub fn eval_scalar<T: Scalar>(&self, inputs: &[T]) -> T {
        assert!(inputs.len() >= self.arity, "expression reads {} variables, got {}", self.arity, inputs.len());
        assert!(!inputs.is_empty() || self.arity == 0);
        let like = inputs.first().cloned();
        let konst = |c: f64| -> T {
            match &like {
                Some(l) => T::constant_like(c, l),
                None => panic!("cannot shape a constant without inputs"),
            }
        };
        let mut vals: Vec<T> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => konst(c),
                Op::Var(i) => inputs[i].clone(),
                Op::Add(a, b) => vals[a].add(&vals[b]),
                Op::Mul(a, b) => vals[a].mul(&vals[b]),
                Op::Neg(a) => vals[a].neg(),
                Op::Powi(a, k) => {
                    let x = vals[a].value();
                    let kf = k as f64;
                    let d1 = if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
                    let d2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * x.powi(k - 2) };
                    vals[a].chain(x.powi(k), d1, d2)
                }
                Op::Powf(a, q) => {
                    let x = vals[a].value();
                    vals[a].chain(x.powf(q), q * x.powf(q - 1.0), q * (q - 1.0) * x.powf(q - 2.0))
                }
                Op::Sin(a) => {
                    let x = vals[a].value();
                    let (s, c) = x.sin_cos();
                    vals[a].chain(s, c, -s)
                }
                Op::Cos(a) => {
                    let x = vals[a].value();
                    let (s, c) = x.sin_cos();
                    vals[a].chain(c, -s, -c)
                }
                Op::Exp(a) => {
                    let e = vals[a].value().exp();
                    vals[a].chain(e, e, e)
                }
                Op::Sqrt(a) => {
                    let x = vals[a].value();
                    let s = x.sqrt();
                    vals[a].chain(s, 0.5 / s, -0.25 / (s * x))
                }
            };
            vals.push(v);
        }
        vals.pop().expect("empty tape")
    }
}

/// Dot product of a constant vector with a vector of expressions.
pub fn linear_form(coeffs: &[f64], vars: &[Expr]) -> Expr {
    Expr::sum(coeffs.iter().zip(vars).map(|(&c, v)| c * v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn jet_matches_hand_derivatives() {
        let v = Expr::vars(2);
        // f = x^2 y + sin(x y)
        let f = v[0].powi(2) * v[1].clone() + (v[0].clone() * v[1].clone()).sin();
        let (x, y) = (0.7, -1.3);
        let j = Tape::compile(&f).jet(&[x, y]);
        let c = (x * y).cos();
        let s = (x * y).sin();
        assert!(close(j.value, x * x * y + s, 1e-15));
        assert!(close(j.d(0), 2.0 * x * y + y * c, 1e-15));
        assert!(close(j.d(1), x * x + x * c, 1e-15));
        assert!(close(j.d2(0, 0), 2.0 * y - y * y * s, 1e-15));
        assert!(close(j.d2(0, 1), 2.0 * x + c - x * y * s, 1e-15));
        assert!(close(j.d2(1, 1), -x * x * s, 1e-15));
        assert_eq!(j.d2(0, 1), j.d2(1, 0));
    }

    #[test]
    fn symbolic_and_forward_derivatives_agree() {
        let v = Expr::vars(3);
        let f = (v[0].clone() * v[1].clone() + 2.0).sqrt() * v[2].cos().exp() + v[0].powf(2.5) / (v[1].powi(2) + 1.0);
        let p = [0.9, 0.4, 1.1];
        let j = Tape::compile(&f).jet(&p);
        for i in 0..3 {
            let di = f.diff(i);
            assert!(close(di.eval(&p), j.d(i), 1e-13));
            for k in 0..3 {
                assert!(close(di.diff(k).eval(&p), j.d2(i, k), 1e-12));
            }
        }
    }

    #[test]
    fn substitution_composes() {
        let v = Expr::vars(2);
        let f = v[0].clone() * v[1].clone();
        let t = Expr::var(0);
        let g = f.substitute(&[t.cos(), t.sin()]);
        let x: f64 = 0.3;
        assert!(close(g.eval(&[x]), x.cos() * x.sin(), 1e-15));
        assert!(close(g.diff(0).eval(&[x]), (2.0 * x).cos(), 1e-15));
    }

    #[test]
    fn shared_subtrees_compile_once() {
        let x = Expr::var(0);
        let mut e = x.clone();
        for _ in 0..40 {
            e = e.clone() * e.clone();
            e = e.sin();
        }
        let tape = Tape::compile(&e);
        assert!(tape.ops.len() < 100);
        assert!(tape.eval(&[0.1]).is_finite());
    }

    #[test]
    fn powi_at_zero_is_finite() {
        let x = Expr::var(0);
        let j = Tape::compile(&x.powi(2)).jet(&[0.0]);
        assert_eq!((j.value, j.d(0), j.d2(0, 0)), (0.0, 0.0, 2.0));
        let j = Tape::compile(&x.powi(1)).jet(&[0.0]);
        assert_eq!(j.d2(0, 0), 0.0);
    }
}
