//! Built-in atomic functions, and the keystream-bit word of a combiner
//! generator assembled from them.
//!
//! Register advance is modeled as a pure map on the state vector, so a
//! generator clocked `t` times is the word `advance^t` applied to the key.

use crate::bits::BitBuf;
use crate::combiner::{CombinerSpec, Key, Keystream};
use crate::error::{Error, Result};
use crate::nlfsr::RegisterSpec;
use crate::wordalg::{evaluate_word, AtomicFunction, FunctionWord};

pub fn identity(width: usize) -> AtomicFunction {
    AtomicFunction::new("Id", width, width, |x| x.clone())
}

pub fn not(width: usize) -> AtomicFunction {
    AtomicFunction::new("NOT", width, width, |x| x.complemented())
}

/// `x & 1`: the least significant bit.
pub fn and1(width: usize) -> AtomicFunction {
    AtomicFunction::new("and1", width, 1, |x| BitBuf::from_bools(&[x.get(0)]))
}

/// `b_n`: packs `n` single bits into an `n`-bit integer, the first bit least
/// significant. On the bit-vector representation this is the identity.
pub fn pack(n: usize) -> AtomicFunction {
    AtomicFunction::new(format!("b{n}"), n, n, |x| x.clone())
}

/// Bits `offset .. offset + len` of the input.
pub fn projection(width: usize, offset: usize, len: usize) -> Result<AtomicFunction> {
    if offset + len > width {
        return Err(Error::Domain(format!("projection {offset}+{len} past width {width}")));
    }
    Ok(AtomicFunction::new(format!("pi[{offset}..{}]", offset + len), width, len, move |x| {
        x.slice(offset, len)
    }))
}

/// XOR with a fixed key.
pub fn xor_key(key: BitBuf) -> AtomicFunction {
    let k = key.clone();
    AtomicFunction::new("xorK", key.len(), key.len(), move |x| {
        let mut y = x.clone();
        y.xor_assign(&k);
        y
    })
    .with_key(key)
}

/// Copies the input `copies` times side by side.
pub fn fanout(width: usize, copies: usize) -> AtomicFunction {
    AtomicFunction::new(format!("fan{copies}"), width, width * copies, move |x| {
        BitBuf::concat(&vec![x.clone(); copies])
    })
}

/// `(f_1, …, f_k)` acting on consecutive slices of the input; outputs are
/// concatenated in the same order.
pub fn tuple(parts: Vec<AtomicFunction>) -> AtomicFunction {
    let in_width = parts.iter().map(|p| p.in_width()).sum();
    let out_width = parts.iter().map(|p| p.out_width()).sum();
    let names: Vec<&str> = parts.iter().map(|p| p.name()).collect();
    let name = format!("({})", names.join(","));
    AtomicFunction::new(name, in_width, out_width, move |x| {
        let mut out = BitBuf::new();
        let mut at = 0;
        for p in &parts {
            out.extend(&p.apply(&x.slice(at, p.in_width())).expect("slice has the declared width"));
            at += p.in_width();
        }
        out
    })
}

/// One clock of a register: shift toward `x0`, feedback into the top cell.
/// Evaluates the feedback polynomial directly, independent of the compiled
/// stepping code.
pub fn register_advance(spec: &RegisterSpec) -> AtomicFunction {
    let l = spec.length();
    let feedback = spec.feedback().clone();
    AtomicFunction::new(format!("adv{}", spec.name()), l, l, move |x| {
        let fb = feedback.eval_bits(x);
        let mut y = x.slice(1, l - 1);
        y.push(fb);
        y
    })
}

/// The combining function applied to a packed input.
pub fn combiner_apply(spec: &CombinerSpec) -> AtomicFunction {
    let table = spec.truth_table().clone();
    let n = table.n_vars();
    AtomicFunction::new("f", n, 1, move |x| BitBuf::from_bools(&[table.get(x.to_u64() as usize)]))
}

/// `f . b_n . (and1, …, and1)` over the concatenated register states.
pub fn keystream_bit_word(spec: &CombinerSpec) -> FunctionWord {
    let taps = spec.registers().iter().map(|r| and1(r.length())).collect();
    FunctionWord::new(vec![combiner_apply(spec), pack(spec.registers().len()), tuple(taps)])
        .expect("widths line up by construction")
}

/// `(adv_1, …, adv_n)` over the concatenated register states.
pub fn advance_word(spec: &CombinerSpec) -> FunctionWord {
    FunctionWord::single(tuple(spec.registers().iter().map(register_advance).collect()))
}

/// Keystream computed by evaluating the two words above, clock by clock.
pub fn word_keystream(spec: &CombinerSpec, key: &Key, n: usize) -> Result<Keystream> {
    let bit = keystream_bit_word(spec);
    let adv = advance_word(spec);
    let mut state = key.to_bitbuf();
    let mut out = BitBuf::new();
    for _ in 0..n {
        out.push(evaluate_word(&bit, &state)?.get(0));
        state = evaluate_word(&adv, &state)?;
    }
    Ok(Keystream::new(out))
}
