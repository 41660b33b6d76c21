//! Exact scalar arithmetic: rationals and multivariate polynomials with
//! rational coefficients.
//!
//! A [`Poly`] carries its own ordered variable list. Binary operations on
//! polynomials over different lists work over the ordered union (left
//! operand's variables first), so data written with partial variable sets
//! composes without ceremony. Equality is semantic: `x` over `[x]` equals
//! `x` over `[x, y]`.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use parse::parse_rational;

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Ordered list of variable names shared between polynomials.
pub type Vars = Arc<[String]>;

/// Default bound on intermediate total degree.
pub const DEFAULT_DEGREE_CAP: u32 = 16;

pub fn make_vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(vars: &Vars) -> Poly {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Poly {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn from_int(vars: &Vars, n: i64) -> Poly {
        Poly::constant(vars, rat(n))
    }

    pub fn one(vars: &Vars) -> Poly {
        Poly::from_int(vars, 1)
    }

    /// The coordinate function for variable `idx`.
    pub fn var(vars: &Vars, idx: usize) -> Poly {
        assert!(idx < vars.len(), "variable index out of range");
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut p = Poly::zero(vars);
        p.terms.insert(e, Rational::one());
        p
    }

    pub fn var_named(vars: &Vars, name: &str) -> Result<Poly> {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Input(format!("unknown variable `{name}`")))?;
        Ok(Poly::var(vars, idx))
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, combining
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(vars: &Vars, terms: I) -> Result<Poly>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Poly::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::Input(format!(
                    "exponent tuple of length {} for {} variables",
                    e.len(),
                    vars.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The value if this polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Re-expresses this polynomial over `target`, which must contain every
    /// variable that actually occurs.
    pub fn over(&self, target: &Vars) -> Result<Poly> {
        if same_vars(&self.vars, target) {
            return Ok(Poly {
                vars: target.clone(),
                terms: self.terms.clone(),
            });
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            let pos = target.iter().position(|t| t == v);
            if pos.is_none() && self.terms.keys().any(|e| e[i] > 0) {
                return Err(Error::Input(format!(
                    "variable `{v}` does not occur in target variable list"
                )));
            }
            map.push(pos);
        }
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut ne = vec![0; target.len()];
            for (i, &k) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    ne[j] += k;
                }
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    fn aligned<'a>(
        &'a self,
        other: &'a Poly,
    ) -> (std::borrow::Cow<'a, Poly>, std::borrow::Cow<'a, Poly>) {
        use std::borrow::Cow;
        if same_vars(&self.vars, &other.vars) {
            return (Cow::Borrowed(self), Cow::Borrowed(other));
        }
        let union = union_vars(&self.vars, &other.vars);
        // union contains both lists, so re-expression cannot fail
        let a = self.over(&union).expect("union contains all variables");
        let b = other.over(&union).expect("union contains all variables");
        (Cow::Owned(a), Cow::Owned(b))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplication that refuses results above `cap` total degree.
    pub fn checked_mul(&self, other: &Poly, cap: u32) -> Result<Poly> {
        let d = self.degree().unwrap_or(0) + other.degree().unwrap_or(0);
        if d > cap && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeCap { degree: d, cap });
        }
        Ok(self * other)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to the variable at `idx`.
    pub fn diff(&self, idx: usize) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (e, c) in &self.terms {
            let k = e[idx];
            if k == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[idx] = k - 1;
            out.add_term(ne, c * rat(k as i64));
        }
        out
    }

    /// Partial derivative with respect to a named variable of this
    /// polynomial's list.
    pub fn diff_var(&self, name: &str) -> Result<Poly> {
        let idx = self
            .vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Input(format!("unknown variable `{name}`")))?;
        Ok(self.diff(idx))
    }

    /// Derivative by name where a variable absent from the list yields zero.
    fn diff_or_zero(&self, name: &str) -> Poly {
        match self.vars.iter().position(|v| v == name) {
            Some(i) => self.diff(i),
            None => Poly::zero(&self.vars),
        }
    }

    /// Evaluates at a point given in this polynomial's variable order.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.vars.len() {
            return Err(Error::Input(format!(
                "evaluation point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.vars.len()
            )));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn parse(text: &str) -> Result<Poly> {
        parse::parse_poly(text, None)
    }

    /// Parses against a fixed variable list; identifiers outside the list
    /// are a parse error.
    pub fn parse_in(text: &str, vars: &Vars) -> Result<Poly> {
        parse::parse_poly(text, Some(vars))
    }

    /// Terms in graded-lexicographic order (highest degree first).
    fn grlex_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }
}

fn same_vars(a: &Vars, b: &Vars) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

pub(crate) fn union_vars(a: &Vars, b: &Vars) -> Vars {
    let mut out: Vec<String> = a.to_vec();
    for v in b.iter() {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out.into()
}

impl PartialEq for Poly {
    fn eq(&self, other: &Poly) -> bool {
        let (a, b) = self.aligned(other);
        a.terms == b.terms
    }
}

impl Eq for Poly {}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.grlex_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&k| k == 0);
            if is_const || !mag.is_one() {
                factors.push(fmt_rational(&mag));
            }
            for (v, &k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{k}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// Prints a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (a, b) = self.aligned(rhs);
        let mut out = a.into_owned();
        for (e, c) in &b.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let (a, b) = self.aligned(rhs);
        let mut out = a.into_owned();
        for (e, c) in &b.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let (a, b) = self.aligned(rhs);
        let mut out = Poly::zero(&a.vars);
        if a.is_zero() || b.is_zero() {
            return out;
        }
        // constant fast path
        if let Some(c) = b.as_constant() {
            return a.scale(&c);
        }
        if let Some(c) = a.as_constant() {
            return b.scale(&c);
        }
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Monomial = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Mul<&Rational> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Rational) -> Poly {
        self.scale(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl std::ops::AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        if same_vars(&self.vars, &rhs.vars) {
            for (e, c) in &rhs.terms {
                self.add_term(e.clone(), c.clone());
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl std::ops::SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        if same_vars(&self.vars, &rhs.vars) {
            for (e, c) in &rhs.terms {
                self.add_term(e.clone(), -c.clone());
            }
        } else {
            *self = &*self - rhs;
        }
    }
}

/// Arithmetic selector for [`poly_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    ScalarMul,
}

/// Right-hand operand of [`poly_arith`].
#[derive(Debug, Clone)]
pub enum Operand {
    Poly(Poly),
    Scalar(Rational),
}

fn check_distinct(vars: &Vars) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(Error::Input(format!(
                "duplicate variable `{v}` in variable list"
            )));
        }
    }
    Ok(())
}

/// Checked polynomial arithmetic over the union of the operands' variables.
pub fn poly_arith(op: ArithOp, p: &Poly, q: &Operand) -> Result<Poly> {
    check_distinct(&p.vars)?;
    match (op, q) {
        (ArithOp::ScalarMul, Operand::Scalar(c)) => Ok(p.scale(c)),
        (ArithOp::ScalarMul, Operand::Poly(q)) => {
            let c = q
                .as_constant()
                .ok_or_else(|| Error::Input("scalar_mul needs a constant operand".into()))?;
            Ok(p.scale(&c))
        }
        (_, Operand::Scalar(c)) => {
            let q = Poly::constant(&p.vars, c.clone());
            poly_arith(op, p, &Operand::Poly(q))
        }
        (op, Operand::Poly(q)) => {
            check_distinct(&q.vars)?;
            Ok(match op {
                ArithOp::Add => p + q,
                ArithOp::Sub => p - q,
                ArithOp::Mul => p * q,
                ArithOp::ScalarMul => unreachable!(),
            })
        }
    }
}

/// A vector field `Σ vₖ ∂ₖ` with polynomial components over `vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVecField {
    vars: Vars,
    components: Vec<Poly>,
}

impl PolyVecField {
    pub fn new(vars: &Vars, components: Vec<Poly>) -> Result<Self> {
        if components.len() != vars.len() {
            return Err(Error::Input(format!(
                "vector field has {} components over {} variables",
                components.len(),
                vars.len()
            )));
        }
        let components = components
            .into_iter()
            .map(|p| p.over(vars))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyVecField {
            vars: vars.clone(),
            components,
        })
    }

    pub fn zero(vars: &Vars) -> Self {
        PolyVecField {
            vars: vars.clone(),
            components: vec![Poly::zero(vars); vars.len()],
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn scale_by(&self, f: &Poly) -> PolyVecField {
        PolyVecField {
            vars: self.vars.clone(),
            components: self.components.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &PolyVecField) -> PolyVecField {
        PolyVecField {
            vars: self.vars.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `ℒ_v p = Σₖ vₖ ∂ₖ p`.
    pub fn lie_derivative(&self, p: &Poly) -> Result<Poly> {
        for v in p.vars.iter() {
            let used = p.terms.keys().any(|e| {
                let i = p.vars.iter().position(|w| w == v).unwrap();
                e[i] > 0
            });
            if used && !self.vars.contains(v) {
                return Err(Error::Input(format!(
                    "polynomial uses `{v}`, which is not a coordinate of the vector field"
                )));
            }
        }
        let mut acc = Poly::zero(&self.vars);
        for (name, vk) in self.vars.iter().zip(&self.components) {
            if vk.is_zero() {
                continue;
            }
            acc += &(vk * &p.diff_or_zero(name));
        }
        Ok(acc)
    }

    /// Lie bracket of vector fields `[v, w]ᵏ = v(wᵏ) − w(vᵏ)`.
    pub fn bracket(&self, other: &PolyVecField) -> Result<PolyVecField> {
        let mut comps = Vec::with_capacity(self.components.len());
        for k in 0..self.components.len() {
            let a = self.lie_derivative(&other.components[k])?;
            let b = other.lie_derivative(&self.components[k])?;
            comps.push(&a - &b);
        }
        PolyVecField::new(&self.vars, comps)
    }
}

/// `ℒ_v p` as a free function.
pub fn lie_derivative(v: &PolyVecField, p: &Poly) -> Result<Poly> {
    v.lie_derivative(p)
}
