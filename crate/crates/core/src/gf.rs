//! Exact arithmetic in GF(p^n) through exponent/logarithm tables.
//!
//! A [`Field`] is built from a [`FieldSpec`]: a prime `p`, a base exponent `e`
//! (so the base field is GF(q) with q = p^e) and an extension degree `m`, plus a
//! monic irreducible modulus of degree `e·m` over GF(p). The class of `x` modulo
//! the modulus is the generator `a`; it must be primitive.
//!
//! Elements are kept in discrete-log form. Multiplication and inversion are
//! exponent arithmetic; addition goes through the polynomial form, stored as the
//! base-`p` integer `c_0 + c_1 p + c_2 p^2 + ...`.

use std::fmt;

use thiserror::Error;

/// Largest supported field size; exp/log tables are materialized in full.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("GF({p}^{degree}) exceeds the supported size of 2^20 elements")]
    TooLarge { p: u32, degree: u32 },
    #[error("modulus has degree {found}, expected {expected}")]
    WrongDegree { expected: usize, found: usize },
    #[error("modulus is not monic")]
    NotMonic,
    #[error("modulus coefficient {0} is not reduced mod p")]
    BadCoefficient(u32),
    #[error("modulus is reducible over GF({p}): divisible by {factor}")]
    Reducible { p: u32, factor: String },
    #[error("generator is not primitive: its order is {order}, expected {expected}")]
    NotPrimitive { order: u64, expected: u64 },
    #[error("{r} does not divide the unit group order {order}")]
    NoRootOfUnity { r: u64, order: u64 },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("element {0:?} does not belong to a field with {1} units")]
    ForeignElement(Elem, u32),
    #[error("cannot parse field element `{0}`")]
    ParseElement(String),
    #[error("cannot parse modulus `{0}`")]
    ParseModulus(String),
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;

/// An element of the extension field: zero, or `a^k` for the generator `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Zero,
    Log(u32),
}

impl Elem {
    pub const ONE: Elem = Elem::Log(0);

    pub fn is_zero(self) -> bool {
        matches!(self, Elem::Zero)
    }

    pub fn log(self) -> Option<u32> {
        match self {
            Elem::Zero => None,
            Elem::Log(k) => Some(k),
        }
    }
}

/// Parameters of a field: GF(p^(e·m)) seen as a degree-`m` extension of GF(p^e).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u32,
    pub base_exp: u32,
    pub ext_degree: u32,
    /// Coefficients over GF(p), lowest degree first; monic of degree `e·m`.
    pub modulus: Vec<u32>,
    pub label: String,
}

impl FieldSpec {
    /// Spec with the default modulus for GF(p^(e·m)).
    pub fn new(p: u32, base_exp: u32, ext_degree: u32) -> Result<Self> {
        let degree = base_exp
            .checked_mul(ext_degree)
            .filter(|&d| d > 0)
            .ok_or(FieldError::ZeroDegree)?;
        check_size(p, degree)?;
        let modulus = default_modulus(p, degree)?;
        Ok(FieldSpec { p, base_exp, ext_degree, modulus, label: "a".into() })
    }

    /// Binary field GF(2^m) over GF(2) with the default modulus.
    pub fn binary(m: u32) -> Result<Self> {
        Self::new(2, 1, m)
    }

    pub fn with_modulus(mut self, modulus: Vec<u32>) -> Self {
        self.modulus = modulus;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn degree(&self) -> u32 {
        self.base_exp * self.ext_degree
    }

    /// Size of the base field GF(q).
    pub fn base_size(&self) -> u64 {
        (self.p as u64).pow(self.base_exp)
    }

    /// Modulus in the textual form used by table headers: a hex bitmask for
    /// p = 2, a comma-separated coefficient list (lowest degree first) otherwise.
    pub fn modulus_text(&self) -> String {
        if self.p == 2 {
            let mask = self.modulus.iter().rev().fold(0u64, |acc, &c| (acc << 1) | c as u64);
            format!("{mask:#x}")
        } else {
            let parts: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
            format!("[{}]", parts.join(","))
        }
    }
}

/// Parse a modulus given as `0x13`-style hex bitmask (p = 2 only) or as a
/// coefficient list `[c0,c1,...]` / `c0,c1,...`, lowest degree first.
pub fn parse_modulus(text: &str, p: u32) -> Result<Vec<u32>> {
    let err = || FieldError::ParseModulus(text.to_string());
    let t = text.trim();
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        if p != 2 {
            return Err(err());
        }
        let mut mask = u64::from_str_radix(hex, 16).map_err(|_| err())?;
        let mut coeffs = Vec::new();
        while mask > 0 {
            coeffs.push((mask & 1) as u32);
            mask >>= 1;
        }
        if coeffs.is_empty() {
            return Err(err());
        }
        return Ok(coeffs);
    }
    let inner = t.trim_start_matches('[').trim_end_matches(']');
    let coeffs = inner
        .split(',')
        .map(|c| c.trim().parse::<u32>().map_err(|_| err()))
        .collect::<Result<Vec<_>>>()?;
    if coeffs.is_empty() {
        return Err(err());
    }
    Ok(coeffs)
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d: &u32| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn check_size(p: u32, degree: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    match (p as u64).checked_pow(degree) {
        Some(n) if n <= MAX_FIELD_SIZE => Ok(()),
        _ => Err(FieldError::TooLarge { p, degree }),
    }
}

// Binary primitive polynomials, indexed by degree.
const BINARY_MODULI: [u64; 21] = [
    0, 0x3, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b,
    0x4443, 0x8003, 0x1100b, 0x20009, 0x40081, 0x80027, 0x100009,
];

/// Default modulus for GF(p^degree): the built-in binary table, otherwise the
/// smallest primitive monic polynomial in base-p order.
pub fn default_modulus(p: u32, degree: u32) -> Result<Vec<u32>> {
    check_size(p, degree)?;
    if p == 2 && (degree as usize) < BINARY_MODULI.len() {
        let mask = BINARY_MODULI[degree as usize];
        return Ok((0..=degree).map(|i| ((mask >> i) & 1) as u32).collect());
    }
    let n = degree as usize;
    let tail_count = (p as u64).pow(degree);
    for code in 0..tail_count {
        let mut coeffs = digits(code, p, n);
        coeffs.push(1);
        if coeffs[0] == 0 {
            continue;
        }
        if find_factor(&coeffs, p).is_none() && generator_order(&coeffs, p) == tail_count - 1 {
            return Ok(coeffs);
        }
    }
    unreachable!("primitive polynomials exist in every degree")
}

fn digits(mut v: u64, p: u32, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((v % p as u64) as u32);
        v /= p as u64;
    }
    out
}

// Dense polynomial helpers over GF(p), lowest degree first.
mod gfp {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv(x: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = x as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lc_inv = inv(b[db], p) as u64;
        while r.len() > db {
            let shift = r.len() - 1 - db;
            let factor = r[r.len() - 1] as u64 * lc_inv % p as u64;
            for (i, &bc) in b.iter().enumerate() {
                let sub = factor * bc as u64 % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, m, p)
    }

    pub fn powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn to_string(a: &[u32]) -> String {
        let mut terms = Vec::new();
        for (i, &c) in a.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn find_factor(modulus: &[u32], p: u32) -> Option<Vec<u32>> {
    let n = modulus.len() - 1;
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = digits(code, p, d);
            divisor.push(1);
            if gfp::rem(modulus, &divisor, p).is_empty() {
                return Some(divisor);
            }
        }
    }
    None
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `x` modulo an irreducible modulus.
fn generator_order(modulus: &[u32], p: u32) -> u64 {
    let n = modulus.len() as u32 - 1;
    let units = (p as u64).pow(n) - 1;
    let x = [0, 1];
    let mut order = units;
    for r in prime_factors(units) {
        while order.is_multiple_of(r) && gfp::powmod(&x, order / r, modulus, p) == [1] {
            order /= r;
        }
    }
    order
}

/// A finite field with immutable exp/log tables.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    size: u32,
    units: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    /// Validate the `FieldSpec` and build the tables.
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let degree = spec.degree();
        if degree == 0 {
            return Err(FieldError::ZeroDegree);
        }
        check_size(spec.p, degree)?;
        let p = spec.p;
        if let Some(&c) = spec.modulus.iter().find(|&&c| c >= p) {
            return Err(FieldError::BadCoefficient(c));
        }
        let mut modulus = spec.modulus.clone();
        gfp::trim(&mut modulus);
        if modulus.len() != degree as usize + 1 {
            return Err(FieldError::WrongDegree {
                expected: degree as usize,
                found: modulus.len().saturating_sub(1),
            });
        }
        if modulus[degree as usize] != 1 {
            return Err(FieldError::NotMonic);
        }
        if let Some(factor) = find_factor(&modulus, p) {
            return Err(FieldError::Reducible { p, factor: gfp::to_string(&factor) });
        }
        let size = p.pow(degree);
        let units = size - 1;
        let order = generator_order(&modulus, p);
        if order != units as u64 {
            return Err(FieldError::NotPrimitive { order, expected: units as u64 });
        }

        let n = degree as usize;
        let pow_p: Vec<u32> = (0..n).map(|i| p.pow(i as u32)).collect();
        let mut exp = Vec::with_capacity(units as usize);
        let mut log = vec![u32::MAX; size as usize];
        let mut cur = vec![0u32; n];
        cur[0] = 1;
        for k in 0..units {
            let code: u32 = cur.iter().zip(&pow_p).map(|(c, w)| c * w).sum();
            exp.push(code);
            log[code as usize] = k;
            // multiply by x and reduce by the monic modulus
            let top = cur[n - 1];
            for i in (1..n).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for i in 0..n {
                    cur[i] = (cur[i] + (p - top) * modulus[i]) % p;
                }
            }
        }
        let spec = FieldSpec { modulus, ..spec };
        Ok(Field { spec, size, units, exp, log })
    }

    /// GF(2^m) with the default modulus.
    pub fn binary(m: u32) -> Result<Self> {
        Field::new(FieldSpec::binary(m)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Order of the multiplicative group, `|L| - 1`.
    pub fn units(&self) -> u32 {
        self.units
    }

    pub fn zero(&self) -> Elem {
        Elem::Zero
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    pub fn generator(&self) -> Elem {
        if self.units == 1 {
            Elem::ONE
        } else {
            Elem::Log(1)
        }
    }

    /// `a^k` for any integer `k`.
    pub fn gen_pow(&self, k: i64) -> Elem {
        Elem::Log(k.rem_euclid(self.units as i64) as u32)
    }

    /// Validating constructor for `a^k` with `0 <= k < |L| - 1`.
    pub fn element(&self, k: u32) -> Result<Elem> {
        self.check(Elem::Log(k))
    }

    pub fn contains(&self, x: Elem) -> bool {
        match x {
            Elem::Zero => true,
            Elem::Log(k) => k < self.units,
        }
    }

    fn check(&self, x: Elem) -> Result<Elem> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(FieldError::ForeignElement(x, self.units))
        }
    }

    /// All elements, zero first, then `a^0, a^1, ...`.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        std::iter::once(Elem::Zero).chain((0..self.units).map(Elem::Log))
    }

    /// Polynomial-form code of `x` (base-p digits are the coefficients).
    pub fn to_code(&self, x: Elem) -> u32 {
        match x {
            Elem::Zero => 0,
            Elem::Log(k) => self.exp[k as usize],
        }
    }

    pub fn from_code(&self, code: u32) -> Elem {
        if code == 0 {
            Elem::Zero
        } else {
            Elem::Log(self.log[code as usize])
        }
    }

    fn add_codes(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p;
        if p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let (mut out, mut w) = (0u32, 1u32);
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * w;
            a /= p;
            b /= p;
            w = w.wrapping_mul(p);
        }
        out
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        match (x, y) {
            (Elem::Zero, z) | (z, Elem::Zero) => z,
            _ => self.from_code(self.add_codes(self.to_code(x), self.to_code(y))),
        }
    }

    pub fn neg(&self, x: Elem) -> Elem {
        match x {
            Elem::Zero => Elem::Zero,
            Elem::Log(k) if self.spec.p == 2 => Elem::Log(k),
            // -1 = a^((|L|-1)/2) in odd characteristic
            Elem::Log(k) => Elem::Log((k + self.units / 2) % self.units),
        }
    }

    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        match (x, y) {
            (Elem::Log(i), Elem::Log(j)) => {
                Elem::Log(((i as u64 + j as u64) % self.units as u64) as u32)
            }
            _ => Elem::Zero,
        }
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        match x {
            Elem::Zero => Err(FieldError::ZeroInverse),
            Elem::Log(k) => Ok(Elem::Log((self.units - k % self.units) % self.units)),
        }
    }

    pub fn div(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: Elem, e: i64) -> Elem {
        match x {
            Elem::Zero if e == 0 => Elem::ONE,
            Elem::Zero => Elem::Zero,
            Elem::Log(k) => self.gen_pow(k as i64 * e.rem_euclid(self.units as i64)),
        }
    }

    /// Field-checked multiplication: rejects elements outside this field.
    pub fn try_mul(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.mul(self.check(x)?, self.check(y)?))
    }

    /// Field-checked addition: rejects elements outside this field.
    pub fn try_add(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.add(self.check(x)?, self.check(y)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, x: Elem) -> Option<u32> {
        let k = x.log()?;
        Some(self.units / gcd(k, self.units))
    }

    /// Primitive `r`-th root of unity `a^((|L|-1)/r)`.
    pub fn root_of_unity(&self, r: u32) -> Result<Elem> {
        if r == 0 || !self.units.is_multiple_of(r) {
            return Err(FieldError::NoRootOfUnity { r: r as u64, order: self.units as u64 });
        }
        Ok(self.gen_pow((self.units / r) as i64))
    }

    /// Whether `x` lies in the base field GF(q), i.e. `x^q = x`.
    pub fn in_base_field(&self, x: Elem) -> bool {
        match x {
            Elem::Zero => true,
            Elem::Log(k) => {
                let q = self.spec.base_size() as u32;
                k % (self.units / (q - 1)) == 0
            }
        }
    }

    pub fn format(&self, x: Elem) -> String {
        let label = &self.spec.label;
        match x {
            Elem::Zero => "0".into(),
            Elem::Log(0) => "1".into(),
            Elem::Log(1) => label.clone(),
            Elem::Log(k) => format!("{label}^{k}"),
        }
    }

    /// Parse `0`, `1`, `a` or `a^k` (using the field's element label).
    pub fn parse(&self, text: &str) -> Result<Elem> {
        let t = text.trim();
        let err = || FieldError::ParseElement(t.to_string());
        match t {
            "0" => return Ok(Elem::Zero),
            "1" => return Ok(Elem::ONE),
            _ => {}
        }
        let rest = t.strip_prefix(self.spec.label.as_str()).ok_or_else(err)?;
        let k = if rest.is_empty() {
            1
        } else {
            let digits = rest.strip_prefix('^').ok_or_else(err)?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            digits.parse::<u64>().map_err(|_| err())?
        };
        if k >= self.units as u64 && !(self.units == 1 && k == 0) {
            return Err(FieldError::ForeignElement(Elem::Log(k.min(u32::MAX as u64) as u32), self.units));
        }
        Ok(self.gen_pow(k as i64))
    }

    pub fn display(&self, x: Elem) -> DisplayElem<'_> {
        DisplayElem { field: self, elem: x }
    }
}

pub struct DisplayElem<'a> {
    field: &'a Field,
    elem: Elem,
}

impl fmt::Display for DisplayElem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format(self.elem))
    }
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
