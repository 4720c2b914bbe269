#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;
use stefan_core::model::{FrontExpansion, Geometry, PhaseParams, ProblemSpec};

pub fn params() -> impl Strategy<Value = PhaseParams> {
    (
        0.5f64..2.0,
        0.5f64..2.0,
        0.5f64..2.0,
        0.5f64..2.0,
        0.0f64..3.0,
        -1.0f64..1.0,
    )
        .prop_map(|(a1, a2, lambda1, lambda2, l_gamma, t_melt)| PhaseParams {
            a1,
            a2,
            lambda1,
            lambda2,
            l_gamma,
            t_melt,
        })
}

/// Planar problems with a `√t` front and compatible initial data.
pub fn sqrt_problem() -> impl Strategy<Value = ProblemSpec> {
    (params(), 0.3f64..1.5, vec(-1.0f64..1.0, 1..4), 2usize..=6).prop_map(
        |(params, alpha, tail, truncation)| {
            let mut f_taylor = vec![params.t_melt];
            f_taylor.extend(tail);
            ProblemSpec {
                geometry: Geometry::Planar,
                b: 0.0,
                f_taylor,
                front: FrontExpansion::sqrt_front(alpha),
                params,
                truncation,
                trace_radius: None,
            }
        },
    )
}

/// Planar problems whose front carries higher-order corrections.
pub fn general_problem() -> impl Strategy<Value = ProblemSpec> {
    (sqrt_problem(), vec(-0.2f64..0.2, 1..3)).prop_map(|(mut spec, extra)| {
        spec.front.alphas.extend(extra);
        spec
    })
}

pub fn spherical_problem() -> impl Strategy<Value = ProblemSpec> {
    (sqrt_problem(), 0.5f64..3.0).prop_map(|(mut spec, b)| {
        spec.geometry = Geometry::Spherical;
        spec.b = b;
        spec
    })
}
