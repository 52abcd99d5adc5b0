//! Scalability benchmark programs.
//!
//! A counter `x` is driven towards zero by a loop whose body first
//! re-randomizes `n` boolean-like variables `b1..bn` (each either by a fair
//! coin or by flipping, chosen nondeterministically) and then branches over
//! all `2^n` valuations. Every arm is a biased step on `x`, so `x` itself is
//! a one-dimensional ranking map.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MAX_N: usize = 14;

/// Arm probabilities of decrementing, each above one half.
const BIASES: [&str; 3] = ["3/4", "2/3", "5/6"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub seed: u64,
    /// Choose between the coin and the flip nondeterministically. Without it
    /// every variable is re-drawn by a coin.
    pub ndet: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("n must be between 1 and {MAX_N}, got {0}")]
pub struct GeneratorError(pub usize);

pub fn generate(spec: &GeneratorSpec) -> Result<String, GeneratorError> {
    if spec.n == 0 || spec.n > MAX_N {
        return Err(GeneratorError(spec.n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bs: Vec<String> = (1..=spec.n).map(|i| format!("b{i}")).collect();
    let mut out = vec![format!("@vars(x, {})", bs.join(", "))];
    let init: Vec<String> = bs.iter().map(|b| format!("0 <= {b} and {b} <= 1")).collect();
    out.push(format!("@init(x >= 0 and {})", init.join(" and ")));
    out.push("while x >= 1 do".into());
    for b in &bs {
        if spec.ndet {
            out.push(format!("  if * then {b} := sample(bernoulli(1/2))"));
            out.push(format!("  else {b} := 1 - {b} fi;"));
        } else {
            out.push(format!("  {b} := sample(bernoulli(1/2));"));
        }
    }
    let mut leaf = || {
        let p = BIASES.choose(&mut rng).expect("non-empty");
        format!("if prob({p}) then x := x - 1 else x := x + 1 fi")
    };
    cascade(&mut out, spec.n, 0, 1, &mut leaf);
    out.push("od".into());
    let mut text = out.join("\n");
    text.push('\n');
    Ok(text)
}

/// Branches on `b{level+1}`; the last level puts the arms inline.
fn cascade(out: &mut Vec<String>, n: usize, level: usize, indent: usize, leaf: &mut dyn FnMut() -> String) {
    let pad = "  ".repeat(indent);
    let b = level + 1;
    if b == n {
        out.push(format!("{pad}if b{b} <= 0 then {}", leaf()));
        out.push(format!("{pad}else {}", leaf()));
        out.push(format!("{pad}fi"));
    } else {
        out.push(format!("{pad}if b{b} <= 0 then"));
        cascade(out, n, level + 1, indent + 1, leaf);
        out.push(format!("{pad}else"));
        cascade(out, n, level + 1, indent + 1, leaf);
        out.push(format!("{pad}fi"));
    }
}
