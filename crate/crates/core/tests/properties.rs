//! Randomized algebraic laws, driven by proptest-chosen seeds.

use genricci::construct::canonical_connection;
use genricci::courant::{random_poly, seeded_rng};
use genricci::polyalg::make_vars;
use genricci::{catalog, CourantAlgebroid, GenConnection, Poly, Section};
use proptest::prelude::*;
use std::sync::OnceLock;

fn chart() -> &'static (CourantAlgebroid, GenConnection) {
    static CELL: OnceLock<(CourantAlgebroid, GenConnection)> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = catalog("exact_chart_H").unwrap();
        let d = canonical_connection(&spec.algebroid, spec.metric.as_ref().unwrap()).unwrap();
        (spec.algebroid, d)
    })
}

fn sections(seed: u64, n: usize) -> (Vec<Section>, Poly) {
    let (alg, _) = chart();
    let mut rng = seeded_rng(seed);
    let secs = (0..n).map(|_| alg.random_section(&mut rng, 1, 3)).collect();
    (secs, alg.random_poly(&mut rng, 1, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polynomial_ring_laws(seed in any::<u64>()) {
        let vars = make_vars(&["x", "y", "z"]);
        let mut rng = seeded_rng(seed);
        let [p, q, r] = [0; 3].map(|_| random_poly(&vars, &mut rng, 3, 5));
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert!((&p - &p).is_zero());
        // Leibniz rule for ∂/∂y
        prop_assert_eq!((&p * &q).diff(1), &(&p.diff(1) * &q) + &(&p * &q.diff(1)));
        // display/parse round trip
        prop_assert_eq!(Poly::parse_in(&p.to_string(), &vars).unwrap(), p);
    }

    #[test]
    fn bracket_laws_on_flux_chart(seed in any::<u64>()) {
        let (alg, _) = chart();
        let (s, f) = sections(seed, 3);
        let (a, b, c) = (&s[0], &s[1], &s[2]);
        let br = |x: &Section, y: &Section| alg.bracket(x, y).unwrap();

        // [a, fb] = f[a,b] + ρ(a)f · b
        prop_assert_eq!(br(a, &b.scale(&f)), &br(a, b).scale(&f) + &b.scale(&alg.lie(a, &f).unwrap()));
        // ρ(a)⟨b,c⟩ = ⟨[a,b],c⟩ + ⟨b,[a,c]⟩
        let lhs = alg.lie(a, &alg.pairing_of(b, c).unwrap()).unwrap();
        let rhs = &alg.pairing_of(&br(a, b), c).unwrap() + &alg.pairing_of(b, &br(a, c)).unwrap();
        prop_assert_eq!(lhs, rhs);
        // [a,[b,c]] = [[a,b],c] + [b,[a,c]]
        prop_assert_eq!(br(a, &br(b, c)), &br(&br(a, b), c) + &br(b, &br(a, c)));
    }

    #[test]
    fn connection_tensorial_and_leibniz(seed in any::<u64>()) {
        let (alg, d) = chart();
        let (s, f) = sections(seed, 2);
        let (a, b) = (&s[0], &s[1]);
        let dab = d.apply(alg, a, b).unwrap();
        prop_assert_eq!(d.apply(alg, &a.scale(&f), b).unwrap(), dab.scale(&f));
        prop_assert_eq!(
            d.apply(alg, a, &b.scale(&f)).unwrap(),
            &dab.scale(&f) + &b.scale(&alg.lie(a, &f).unwrap())
        );
    }
}
