#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use xfcm::fcm::{ConceptId, ConceptKind, ConceptSpec, Family, Interval, Linkage, Network, Threshold, WeightFunction};

fn weight<R: Rng>(rng: &mut R, family: Family) -> WeightFunction {
    let mut u = || rng.gen_range(-1.0..=1.0);
    match family {
        Family::Constant => WeightFunction::constant(u()),
        Family::PiecewiseSign => WeightFunction::piecewise_sign(u(), u()),
        Family::ScaledByIntermediate => WeightFunction::scaled_by_intermediate(u()),
        Family::AffineInIntermediate => {
            let (a, b) = (u(), u());
            let s = a.abs() + b.abs();
            let k = if s > 1.0 { 1.0 / s } else { 1.0 };
            WeightFunction::affine_in_intermediate(a * k, b * k)
        }
    }
    .expect("parameters are in range")
}

/// A random valid network with up to `max_concepts` concepts and
/// `max_linkages` linkages, plus an admissible initial state.
pub fn random_network<R: Rng>(rng: &mut R, max_concepts: usize, max_linkages: usize) -> (Network, Vec<f64>) {
    let n = rng.gen_range(2..=max_concepts);
    let kinds = [ConceptKind::State, ConceptKind::Auxiliary, ConceptKind::Input, ConceptKind::Parameter];
    let mut concepts: Vec<ConceptSpec> = (0..n)
        .map(|i| {
            let kind = if i == 0 { ConceptKind::State } else { *kinds.choose(rng).unwrap() };
            let mut c = ConceptSpec::new(i as u32 + 1, format!("c{}", i + 1), kind);
            if rng.gen_bool(0.3) {
                let lo = rng.gen_range(-1.0..0.0);
                let hi = rng.gen_range(0.0..=1.0);
                c = c.with_interval(Interval::new(lo, hi).unwrap());
            }
            c
        })
        .collect();
    concepts.shuffle(rng);

    let ids: Vec<ConceptId> = concepts.iter().map(|c| c.id).collect();
    let updatable: Vec<ConceptId> = concepts.iter().filter(|c| c.kind.is_updatable()).map(|c| c.id).collect();
    let mut alpha = BTreeMap::new();
    for &id in &updatable {
        alpha.insert(id, rng.gen_range(0.0..=1.0));
    }

    let families = [
        Family::Constant,
        Family::PiecewiseSign,
        Family::ScaledByIntermediate,
        Family::AffineInIntermediate,
    ];
    let target = rng.gen_range(0..=max_linkages);
    let mut linkages = Vec::new();
    let mut used = std::collections::HashSet::new();
    for _ in 0..target * 4 {
        if linkages.len() == target {
            break;
        }
        let cause = *ids.choose(rng).unwrap();
        let effect = *updatable.choose(rng).unwrap();
        if cause == effect || !used.insert((cause, effect)) {
            continue;
        }
        let family = *families.choose(rng).unwrap();
        let w = weight(rng, family);
        linkages.push(if family.needs_intermediate() {
            Linkage::complex(cause, effect, *ids.choose(rng).unwrap(), w)
        } else {
            Linkage::simple(cause, effect, w)
        });
    }

    let net = Network::new(concepts, linkages, alpha, Threshold::Clamp).expect("generated network is valid");
    let state = net
        .concepts()
        .iter()
        .map(|c| rng.gen_range(c.interval.lo()..=c.interval.hi()))
        .collect();
    (net, state)
}
