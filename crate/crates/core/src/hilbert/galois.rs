//! Small finite fields GF(p^n) with table-driven arithmetic.
//!
//! Elements are encoded as integers in `0..q` whose base-`p` digits are the coefficients of
//! the polynomial representative (lowest degree first). For `n = 1` the encoding is the
//! residue itself.

use super::HilbertError;

/// Largest field order built; tables are `q²` entries.
pub const MAX_ORDER: usize = 1024;

#[derive(Clone, Debug)]
pub struct GaloisField {
    p: usize,
    n: usize,
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    trace: Vec<u16>,
}

/// Splits `q` into `(p, n)` with `q = p^n`, or `None` if `q` is not a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut n = 0;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

impl GaloisField {
    pub fn new(q: usize) -> Result<Self, HilbertError> {
        let (p, n) = prime_power(q).ok_or(HilbertError::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(HilbertError::NotPrimePower(q));
        }
        let modulus = irreducible_poly(p, n);

        let to_digits = |x: usize| -> Vec<usize> {
            let mut d = Vec::with_capacity(n);
            let mut x = x;
            for _ in 0..n {
                d.push(x % p);
                x /= p;
            }
            d
        };
        let from_digits = |d: &[usize]| -> usize { d.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            let da = to_digits(a);
            for b in 0..q {
                let db = to_digits(b);
                let s: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = from_digits(&s) as u16;
                let prod = poly_mulmod(&da, &db, &modulus, p);
                mul[a * q + b] = from_digits(&prod) as u16;
            }
        }

        let mut field = Self {
            p,
            n,
            q,
            add,
            mul,
            trace: vec![0; q],
        };
        for x in 0..q {
            // tr(x) = x + x^p + ... + x^{p^{n-1}}, which lies in the prime subfield.
            let mut acc = 0usize;
            let mut pow = x;
            for _ in 0..n {
                acc = field.add(acc, pow);
                pow = field.pow(pow, p);
            }
            debug_assert!(acc < p, "trace left the prime field");
            field.trace[x] = acc as u16;
        }
        Ok(field)
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    pub fn pow(&self, a: usize, mut e: usize) -> usize {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace onto the prime field, returned as a residue in `0..p`.
    pub fn trace(&self, a: usize) -> usize {
        self.trace[a] as usize
    }

    /// The polynomial-basis element `x^i` (for `i < n`).
    pub fn basis_element(&self, i: usize) -> usize {
        self.p.pow(i as u32)
    }

    /// Base-`p` digit `i` of the encoding of `a`.
    pub fn digit(&self, a: usize, i: usize) -> usize {
        (a / self.p.pow(i as u32)) % self.p
    }
}

/// `a·b mod m` over GF(p); `m` is monic of degree `n` and operands have length `n`.
fn poly_mulmod(a: &[usize], b: &[usize], m: &[usize], p: usize) -> Vec<usize> {
    let n = m.len() - 1;
    let mut prod = vec![0usize; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (n..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        // Subtract c·x^{deg-n}·m.
        for (k, &mk) in m.iter().enumerate() {
            let idx = deg - n + k;
            prod[idx] = (prod[idx] + p * p - (c * mk) % p) % p;
        }
    }
    prod.truncate(n);
    prod
}

/// Lexicographically smallest monic irreducible polynomial of degree `n` over GF(p),
/// coefficients lowest degree first.
fn irreducible_poly(p: usize, n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![0, 1];
    }
    let count = p.pow(n as u32);
    for code in 0..count {
        let mut poly: Vec<usize> = (0..n).map(|i| (code / p.pow(i as u32)) % p).collect();
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF({p})")
}

fn is_irreducible(poly: &[usize], p: usize) -> bool {
    let n = poly.len() - 1;
    if poly[0] == 0 {
        return false;
    }
    // Trial division by every monic polynomial of degree 1..=n/2.
    for deg in 1..=n / 2 {
        for code in 0..p.pow(deg as u32) {
            let mut divisor: Vec<usize> = (0..deg).map(|i| (code / p.pow(i as u32)) % p).collect();
            divisor.push(1);
            if poly_rem_is_zero(poly, &divisor, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(num: &[usize], den: &[usize], p: usize) -> bool {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    for deg in (dd..r.len()).rev() {
        let c = r[deg];
        if c == 0 {
            continue;
        }
        for (k, &dk) in den.iter().enumerate() {
            let idx = deg - dd + k;
            r[idx] = (r[idx] + p * p - (c * dk) % p) % p;
        }
    }
    r[..dd].iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(5), Some((5, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn field_axioms_hold() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                if a != 0 {
                    let inverses = (1..q).filter(|&b| f.mul(a, b) == 1).count();
                    assert_eq!(inverses, 1, "q={q}, a={a}");
                }
                for b in 0..q {
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn trace_is_onto_and_additive() {
        for q in [4, 8, 9, 16] {
            let f = GaloisField::new(q).unwrap();
            let p = f.characteristic();
            let mut counts = vec![0; p];
            for a in 0..q {
                counts[f.trace(a)] += 1;
                for b in 0..q {
                    assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
                }
            }
            // Balanced: each residue is hit q/p times.
            assert!(counts.iter().all(|&c| c == q / p), "q={q}: {counts:?}");
        }
    }

    #[test]
    fn gf4_and_gf8_moduli_are_the_usual_ones() {
        assert_eq!(irreducible_poly(2, 2), vec![1, 1, 1]);
        assert_eq!(irreducible_poly(2, 3), vec![1, 1, 0, 1]);
    }
}
