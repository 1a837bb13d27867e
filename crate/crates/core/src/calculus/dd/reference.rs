//! Correctly rounded references for the binary64 arguments, split as (hi, lo).

pub(super) const EXP: &[(f64, (f64, f64))] = &[
    (0.1, (1.1051709180756477, -8.149523913327619e-17)),
    (1.0, (2.718281828459045, 1.4456468917292502e-16)),
    (-3.7, (0.024723526470339388, -1.294857794723138e-18)),
    (20.5, (799902177.4755054, 5.468433516540899e-08)),
    (1e-10, (1.0000000001, -8.269037096265652e-18)),
    (-700.0, (9.85967654375977e-305, 8.5e-322)),
    (0.6931471805599453, (2.0, -4.638093627692599e-17)),
    (5.5, (244.69193226422038, 4.129320187450839e-15)),
];

pub(super) const LN: &[(f64, (f64, f64))] = &[
    (1.1, (0.09531017980432493, 5.927240202146761e-18)),
    (2.0, (0.6931471805599453, 2.3190468138462996e-17)),
    (1e-05, (-11.512925464970229, 2.790027459050308e-16)),
    (0.75, (-0.2876820724517809, -2.607160616442564e-17)),
    (123456.789, (11.723646487185881, -4.1025541885795297e-16)),
    (
        1.0000000001,
        (1.000000082690371e-10, -4.2169170658954805e-27),
    ),
    (3e+200, (461.61563088747727, -1.9777331590804144e-14)),
];

#[allow(clippy::type_complexity)]
pub(super) const SIN_COS: &[(f64, (f64, f64), (f64, f64))] = &[
    (
        0.5,
        (0.479425538604203, -5.103969860556013e-18),
        (0.8775825618903728, -4.2623149864279997e-17),
    ),
    (
        0.1,
        (0.09983341664682815, 3.08001512929492e-18),
        (0.9950041652780258, -5.50210156918377e-17),
    ),
    (
        1.0,
        (0.8414709848078965, 1.776845092935536e-18),
        (0.5403023058681398, -4.760954612604417e-17),
    ),
    (
        3.0,
        (0.1411200080598672, 8.577269787017502e-18),
        (-0.9899924966004454, -4.2060261566099734e-17),
    ),
    (
        -2.2,
        (-0.8084964038195901, 1.2844576299244281e-17),
        (-0.5885011172553458, -3.406189530655746e-17),
    ),
    (
        100.0,
        (-0.5063656411097588, -3.050947053792115e-18),
        (0.8623188722876839, 4.334809858136501e-17),
    ),
    (
        0.7853981633974483,
        (0.7071067811865475, 4.1036934489363755e-17),
        (0.7071067811865476, -2.6687565161377232e-17),
    ),
    (
        7.0,
        (0.6569865987187891, 2.937261786543214e-17),
        (0.7539022543433046, 3.728245359710072e-17),
    ),
];
