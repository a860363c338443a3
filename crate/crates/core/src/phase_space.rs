//! Arithmetic in the N-element field and the geometry of the N x N discrete
//! phase space.
//!
//! Every N^2-indexed array in this crate uses the flattening
//! `index(a) = a1 * N + a2`, with `a1` the horizontal and `a2` the vertical
//! coordinate.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A prime modulus `N >= 2`. Primality is checked once, at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(n: u32) -> Result<Self> {
        if is_prime(n as u64) {
            Ok(Prime(n))
        } else {
            Err(Error::NotPrime(n as u64))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// N as a `usize`, the Hilbert-space dimension.
    #[inline]
    pub fn dim(self) -> usize {
        self.0 as usize
    }

    /// Number of phase-space points, N^2.
    #[inline]
    pub fn num_points(self) -> usize {
        self.dim() * self.dim()
    }

    #[inline]
    pub fn is_odd(self) -> bool {
        self.0 != 2
    }

    pub fn element(self, value: i64) -> FieldElement {
        FieldElement::new(value, self)
    }

    pub fn point(self, a1: i64, a2: i64) -> PhasePoint {
        PhasePoint::new(a1, a2, self)
    }

    /// All N^2 points in flattening order.
    pub fn points(self) -> impl Iterator<Item = PhasePoint> {
        (0..self.num_points()).map(move |i| PhasePoint::from_index(i, self))
    }

    /// `x mod N` for any signed integer.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    /// Symplectic product of two flattened points, as a residue in `[0, N)`.
    #[inline]
    pub(crate) fn symplectic_idx(self, a: usize, b: usize) -> u32 {
        let n = self.dim();
        let (a1, a2) = ((a / n) as i64, (a % n) as i64);
        let (b1, b2) = ((b / n) as i64, (b % n) as i64);
        self.reduce(a2 * b1 - a1 * b2)
    }

    /// Flattened index of `a + b`.
    #[inline]
    pub(crate) fn add_idx(self, a: usize, b: usize) -> usize {
        let n = self.dim();
        ((a / n + b / n) % n) * n + (a % n + b % n) % n
    }

    /// Flattened index of `a - b`.
    #[inline]
    pub(crate) fn sub_idx(self, a: usize, b: usize) -> usize {
        let n = self.dim();
        ((a / n + n - b / n) % n) * n + (a % n + n - b % n) % n
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of the field of integers mod a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: Prime,
}

impl FieldElement {
    pub fn new(value: i64, modulus: Prime) -> Self {
        FieldElement {
            value: modulus.reduce(value),
            modulus,
        }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FieldElement) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.modulus.0,
                right: other.modulus.0,
            })
        }
    }

    pub fn checked_add(self, other: FieldElement) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.element(self.value as i64 + other.value as i64))
    }

    pub fn checked_sub(self, other: FieldElement) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.element(self.value as i64 - other.value as i64))
    }

    pub fn checked_mul(self, other: FieldElement) -> Result<Self> {
        self.check(other)?;
        Ok(self.modulus.element(self.value as i64 * other.value as i64))
    }

    pub fn pow(self, mut exp: u32) -> Self {
        let n = self.modulus.0 as u64;
        let mut base = self.value as u64;
        let mut acc = 1u64 % n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % n;
            }
            base = base * base % n;
            exp >>= 1;
        }
        self.modulus.element(acc as i64)
    }

    /// Multiplicative inverse, by Fermat's little theorem. `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(self.modulus.0 - 2))
        }
    }

    /// `x / 2`. In GF(2) only even representatives (i.e. zero) have a half.
    pub fn half(self) -> Result<Self> {
        if self.modulus.0 == 2 {
            return if self.value == 0 {
                Ok(self)
            } else {
                Err(Error::NoHalf(self.value))
            };
        }
        let inv2 = (self.modulus.0 as i64 + 1) / 2;
        Ok(self.modulus.element(self.value as i64 * inv2))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// The operator impls panic on a modulus mismatch; use the `checked_*`
// variants where the operands come from untrusted input.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs)
            .expect("field elements with different moduli")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs)
            .expect("field elements with different moduli")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs)
            .expect("field elements with different moduli")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        self.modulus.element(-(self.value as i64))
    }
}

/// A point `(a1, a2)` of the N x N phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasePoint {
    pub a1: FieldElement,
    pub a2: FieldElement,
}

impl PhasePoint {
    pub fn new(a1: i64, a2: i64, n: Prime) -> Self {
        PhasePoint {
            a1: n.element(a1),
            a2: n.element(a2),
        }
    }

    pub fn from_elements(a1: FieldElement, a2: FieldElement) -> Result<Self> {
        a1.check(a2)?;
        Ok(PhasePoint { a1, a2 })
    }

    pub fn origin(n: Prime) -> Self {
        Self::new(0, 0, n)
    }

    /// Inverse of [`PhasePoint::index`]; `index` must be below N^2.
    pub fn from_index(index: usize, n: Prime) -> Self {
        debug_assert!(index < n.num_points());
        let d = n.dim();
        Self::new((index / d) as i64, (index % d) as i64, n)
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.a1.modulus
    }

    /// Flattened position `a1 * N + a2`.
    #[inline]
    pub fn index(self) -> usize {
        self.a1.value as usize * self.modulus().dim() + self.a2.value as usize
    }

    pub fn scale(self, k: FieldElement) -> Self {
        PhasePoint {
            a1: self.a1 * k,
            a2: self.a2 * k,
        }
    }

    pub fn half(self) -> Result<Self> {
        Ok(PhasePoint {
            a1: self.a1.half()?,
            a2: self.a2.half()?,
        })
    }

    pub fn is_origin(self) -> bool {
        self.a1.is_zero() && self.a2.is_zero()
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: Self) -> Self {
        PhasePoint {
            a1: self.a1 + rhs.a1,
            a2: self.a2 + rhs.a2,
        }
    }
}

impl Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: Self) -> Self {
        PhasePoint {
            a1: self.a1 - rhs.a1,
            a2: self.a2 - rhs.a2,
        }
    }
}

impl Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> Self {
        PhasePoint {
            a1: -self.a1,
            a2: -self.a2,
        }
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a1, self.a2)
    }
}

/// `<a, b> = a2 b1 - a1 b2 (mod N)`.
pub fn symplectic(alpha: PhasePoint, beta: PhasePoint) -> Result<FieldElement> {
    alpha.a1.check(beta.a1)?;
    Ok(alpha.a2 * beta.a1 - alpha.a1 * beta.a2)
}

/// Direction of a family of parallel lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Lines of fixed `a1`.
    Vertical,
    /// Lines `a2 = slope * a1 + c`.
    Slope(u32),
}

/// The N points solving one linear equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    direction: Direction,
    points: Vec<PhasePoint>,
}

impl Line {
    /// Validates that `points` are N distinct collinear points and recovers
    /// the line's direction.
    pub fn new(points: Vec<PhasePoint>) -> Result<Self> {
        let Some(&first) = points.first() else {
            return Err(Error::MalformedLine("no points".into()));
        };
        let n = first.modulus();
        if points.len() != n.dim() {
            return Err(Error::MalformedLine(format!(
                "expected {} points, found {}",
                n.dim(),
                points.len()
            )));
        }
        for p in &points {
            if p.modulus() != n {
                return Err(Error::ModulusMismatch {
                    left: n.get(),
                    right: p.modulus().get(),
                });
            }
        }
        let mut seen = vec![false; n.num_points()];
        for p in &points {
            if std::mem::replace(&mut seen[p.index()], true) {
                return Err(Error::MalformedLine(format!("repeated point {p}")));
            }
        }
        // All points distinct, so the second one fixes the direction.
        let step = points[1] - first;
        let direction = if step.a1.is_zero() {
            Direction::Vertical
        } else {
            let slope = step.a2 * step.a1.inverse().expect("nonzero");
            Direction::Slope(slope.value())
        };
        for &p in &points[2..] {
            let d = p - first;
            if !symplectic(d, step)?.is_zero() {
                return Err(Error::MalformedLine(format!(
                    "{p} is not collinear with {first} and {}",
                    points[1]
                )));
            }
        }
        Ok(Line { direction, points })
    }

    fn from_parts(direction: Direction, points: Vec<PhasePoint>) -> Self {
        Line { direction, points }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn contains(&self, p: PhasePoint) -> bool {
        self.points.contains(&p)
    }

    pub fn is_parallel(&self, other: &Line) -> bool {
        self.direction == other.direction
    }
}

/// N parallel lines partitioning the phase space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Striation {
    direction: Direction,
    lines: Vec<Line>,
}

impl Striation {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// The position of the line through `p`.
    pub fn line_of(&self, p: PhasePoint) -> usize {
        match self.direction {
            Direction::Vertical => p.a1.value() as usize,
            Direction::Slope(s) => {
                let c = p.a2 - p.modulus().element(s as i64) * p.a1;
                c.value() as usize
            }
        }
    }
}

/// The N+1 striations: vertical lines (fixed `a1`, indexed by `a1`) first,
/// then `a2 = s a1 + c` for slopes `s = 0..N`, each indexed by intercept `c`.
pub fn enumerate_striations(n: Prime) -> Vec<Striation> {
    let d = n.dim() as i64;
    let mut out = Vec::with_capacity(n.dim() + 1);
    let vertical = (0..d)
        .map(|a1| {
            let pts = (0..d).map(|a2| n.point(a1, a2)).collect();
            Line::from_parts(Direction::Vertical, pts)
        })
        .collect();
    out.push(Striation {
        direction: Direction::Vertical,
        lines: vertical,
    });
    for s in 0..d {
        let lines = (0..d)
            .map(|c| {
                let pts = (0..d).map(|a1| n.point(a1, s * a1 + c)).collect();
                Line::from_parts(Direction::Slope(s as u32), pts)
            })
            .collect();
        out.push(Striation {
            direction: Direction::Slope(s as u32),
            lines,
        });
    }
    out
}
