//! Small model builders shared by tests.

use alloc::vec;

use super::{MechanismKind, MechanismSpec, NoiseSpec, ParametricScm, PrimitiveKind};

/// Fair-or-biased coin: a parentless XOR gate whose noise is the coin.
pub(crate) fn coin(node: &str, p: f64) -> MechanismSpec {
    MechanismSpec {
        node: node.into(),
        parents: vec![],
        kind: MechanismKind::LibraryPrimitive(PrimitiveKind::XorNoise),
        params: vec![],
        noise: NoiseSpec::Bernoulli(p),
    }
}

/// `child = parent XOR Bern(flip)`.
pub(crate) fn xor_link(node: &str, parent: &str, flip: f64) -> MechanismSpec {
    MechanismSpec {
        node: node.into(),
        parents: vec![parent.into()],
        kind: MechanismKind::LibraryPrimitive(PrimitiveKind::XorNoise),
        params: vec![],
        noise: NoiseSpec::Bernoulli(flip),
    }
}

/// The two-node noisy chain `x -> y` with flip rate `q`.
pub(crate) fn noisy_chain(q: f64) -> ParametricScm {
    ParametricScm::markovian(vec![coin("x", 0.5), xor_link("y", "x", q)])
}
