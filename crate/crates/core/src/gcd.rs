//! Multivariate polynomial GCD over the integers (recursive primitive PRS),
//! and trial-division factoring against candidate factors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::polynomial::{Monomial, Polynomial, Var};

/// Greatest common divisor with a positive leading coefficient. The integer
/// content is the gcd of the operands' contents. `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.sign_normalized();
    }
    if b.is_zero() {
        return a.sign_normalized();
    }
    if let (Some(x), Some(y)) = (a.constant_value(), b.constant_value()) {
        return Polynomial::constant(x.gcd(&y));
    }
    if a.div_exact(b).is_some() {
        return b.sign_normalized();
    }
    if b.div_exact(a).is_some() {
        return a.sign_normalized();
    }
    let v = *a.vars().union(&b.vars()).next().expect("a non-constant operand has a variable");
    let in_a = a.degree_in(v) > 0;
    let in_b = b.degree_in(v) > 0;
    if !in_a {
        return gcd(a, &content_in(b, v));
    }
    if !in_b {
        return gcd(&content_in(a, v), b);
    }
    let (ca, cb) = (content_in(a, v), content_in(b, v));
    let content = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).expect("content divides");
    let mut g = b.div_exact(&cb).expect("content divides");
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() {
        let r = pseudo_remainder(&f, &g, v);
        f = g;
        g = if r.is_zero() { r } else { primitive_in(&r, v) };
    }
    let prim = if f.degree_in(v) == 0 { Polynomial::one() } else { primitive_in(&f, v) };
    (&content * &prim).sign_normalized()
}

/// GCD of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Polynomial, v: Var) -> Polynomial {
    p.coefficients_in(v).iter().fold(Polynomial::zero(), |acc, c| gcd(&acc, c))
}

fn primitive_in(p: &Polynomial, v: Var) -> Polynomial {
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides")
}

/// Pseudo-remainder of `f` by `g` in the variable `v`.
fn pseudo_remainder(f: &Polynomial, g: &Polynomial, v: Var) -> Polynomial {
    let dg = g.degree_in(v);
    let lc = g.coefficients_in(v).pop().expect("nonzero divisor");
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lr = r.coefficients_in(v).pop().expect("nonzero remainder");
        let shift = Polynomial::term(1, Monomial::from_powers([(v, dr - dg)]));
        r = &(&lc * &r) - &(&(&lr * &shift) * g);
    }
    r
}

/// Splits `p` by repeated trial division against `candidates`.
///
/// Returns the factors found with multiplicities, the integer unit and the
/// cofactor that none of the candidates divide.
pub fn factor_by_candidates(
    p: &Polynomial,
    candidates: &[Polynomial],
) -> (Vec<(Polynomial, u32)>, Polynomial) {
    let mut rest = p.clone();
    let mut found = Vec::new();
    for cand in candidates {
        let cand = cand.normalized();
        if cand.is_constant() {
            continue;
        }
        let mut mult = 0;
        while let Some(q) = rest.div_exact(&cand) {
            rest = q;
            mult += 1;
        }
        if mult > 0 {
            found.push((cand, mult));
        }
    }
    (found, rest)
}

/// Renders a factored product such as `-k21^2*k32*(k01 + k21 - k32)`.
pub fn render_factored(factors: &[(Polynomial, u32)], cofactor: &Polynomial) -> String {
    let mut parts = Vec::new();
    let mut prefix = String::new();
    if let Some(c) = cofactor.constant_value() {
        if c.is_negative() {
            prefix.push('-');
        }
        let mag = c.abs();
        if mag != BigInt::from(1) || factors.is_empty() {
            parts.push(mag.to_string());
        }
    } else {
        parts.push(format!("({cofactor})"));
    }
    for (f, e) in factors {
        let base = if f.num_terms() == 1 { f.to_string() } else { format!("({f})") };
        parts.push(if *e == 1 { base } else { format!("{base}^{e}") });
    }
    if parts.is_empty() {
        parts.push("1".into());
    }
    format!("{prefix}{}", parts.join("*"))
}
