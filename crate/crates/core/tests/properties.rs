use proptest::prelude::*;

use mcg_core::delta::{derivations, LoopLedger, Rule};
use mcg_core::catalog::primed_relators;
use mcg_core::expr::MacroMode;
use mcg_core::serial::{self, Format};
use mcg_core::subgroup::basis_report;
use mcg_core::Presentation;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_presentations_round_trip(seed in any::<u64>(), rank in 1u16..5, rels in 0usize..6) {
        let p = Presentation::random(seed, rank, rels, 9);
        for f in [Format::Structured, Format::AlgebraText] {
            let text = serial::render(&p, f);
            let back = serial::parse(&text, f).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(serial::render(&back, f), text);
        }
    }

    #[test]
    fn tietze_moves_keep_abelian_invariants(seed in any::<u64>(), moves in 0usize..30) {
        let p = Presentation::random(seed, 3, 3, 7);
        let q = p.random_tietze(seed.rotate_left(7), moves).unwrap();
        prop_assert_eq!(q.abelianization().unwrap(), p.abelianization().unwrap());
    }

    #[test]
    fn kernel_bases_agree(g in 1u16..7, n in 2u16..6) {
        prop_assert!(basis_report(g, n).unwrap().holds());
    }

    #[test]
    fn flipping_merge_signs_negates_the_exponent(which in 0usize..10) {
        let mut d = derivations()[which].clone();
        for s in &mut d.steps {
            s.rule = match s.rule {
                Rule::LPlus => Rule::LMinus,
                Rule::LMinus => Rule::LPlus,
                r => r,
            };
        }
        let table = primed_relators(6, 4, MacroMode::Generators).unwrap();
        let inst = table
            .iter()
            .map(|(i, _)| i)
            .find(|i| format!("{}'", i.family.tag) == d.family && i.branch.name == d.branch)
            .unwrap();
        let r = d.replay(inst, 6, 4, LoopLedger::builtin()).unwrap();
        prop_assert_eq!(r.replay.epsilon, -d.epsilon);
        prop_assert!(r.start_ok && r.end_ok && r.replay.matches_end);
        prop_assert_eq!(r.replay.matches_epsilon, d.epsilon == 0);
    }
}
