use proptest::prelude::*;

use minsky::conway::{compile_conway, ConwayOptions};
use minsky::identity::Identity;
use minsky::machine::reference::{ex_a, ex_c};
use minsky::machine::{parse_machine, run, Command, Configuration, MinskyMachine, RunOutcome};
use minsky::presentation::{emit, EmitOptions, Variant};
use minsky::rewrite::{normalize, NormalForm};
use minsky::trace::{canonical, Commutation, Gen};

fn command() -> impl Strategy<Value = (u32, usize, u8, u32)> {
    (1..=4u32, 1..=2usize, 0..3u8, 0..=4u32)
}

fn machine(cmds: &[(u32, usize, u8, u32)]) -> Option<MinskyMachine> {
    let commands = cmds
        .iter()
        .map(|&(l, g, kind, next)| match kind {
            0 => Command::add(l, g, next),
            1 => Command::sub(l, g, next),
            _ => Command::zero_jump(l, g, next),
        })
        .collect();
    MinskyMachine::new("p", 2, commands).ok()
}

proptest! {
    #[test]
    fn machine_text_round_trips(cmds in prop::collection::vec(command(), 1..8)) {
        if let Some(m) = machine(&cmds) {
            prop_assert_eq!(parse_machine(&m.to_string()).unwrap(), m);
        }
    }

    #[test]
    fn canonical_form_is_a_class_invariant(w in prop::collection::vec(0..6 as Gen, 0..12), swap in 0..11usize) {
        // letters 0..3 commute with 3..6 pairwise
        let c = Commutation::new(6, (0..3).flat_map(|a| (3..6).map(move |b| (a, b))));
        let k = canonical(&c, &w);
        prop_assert_eq!(canonical(&c, &k), k.clone());
        if swap + 1 < w.len() && c.commute(w[swap], w[swap + 1]) {
            let mut v = w.clone();
            v.swap(swap, swap + 1);
            prop_assert_eq!(canonical(&c, &v), k);
        }
    }

    #[test]
    fn kappa_follows_one_step(label in 1..=3u32, a in 0..40u64, b in 0..40u64) {
        for m in [ex_a(), ex_c()] {
            if label > m.max_label() {
                continue;
            }
            let f = compile_conway(&m, ConwayOptions::default()).unwrap();
            let c = Configuration::new(label, vec![a, b]);
            let image = f.apply(&f.encode(&c).unwrap()).unwrap();
            match m.step(&c).unwrap().as_slice() {
                [n] => prop_assert_eq!(image, f.encode(n).unwrap()),
                [] => prop_assert_eq!(image, f.encode(&c).unwrap()),
                _ => prop_assert!(false, "nondeterministic"),
            }
        }
    }

    #[test]
    fn configuration_words_decode(label in 0..=3u32, a in 0..6u64, b in 0..6u64) {
        for v in [Variant::S1, Variant::S2Right, Variant::S2Left, Variant::Amalgam] {
            let p = emit(v, &ex_a(), EmitOptions::default()).unwrap();
            let c = Configuration::new(label, vec![a, b]);
            let w = p.config_word(&c, None).unwrap();
            prop_assert_eq!(p.decode_config(&w), Some(c));
        }
    }

    #[test]
    fn halting_inputs_have_zero_words(m in 0..12u64) {
        let machine = ex_a();
        let p = emit(Variant::S1, &machine, EmitOptions::default()).unwrap();
        let c = Configuration::new(1, vec![m, 0]);
        let halts = matches!(run(&machine, &c, 1000).unwrap(), RunOutcome::Halted(..));
        prop_assert_eq!(halts, m % 2 == 0);
        // the input word itself is a nonzero normal form either way
        prop_assert!(matches!(normalize(&p, &p.config_word(&c, None).unwrap()).unwrap(), NormalForm::Word(_)));
    }

    #[test]
    fn identity_text_round_trips(l in prop::collection::vec(0..3usize, 1..6), r in prop::collection::vec(0..3usize, 1..6)) {
        let name = |w: &[usize]| w.iter().map(|x| format!("x{}", x + 1)).collect::<Vec<_>>().join(" ");
        let id: Identity = format!("{} = {}", name(&l), name(&r)).parse().unwrap();
        let again: Identity = id.to_string().parse().unwrap();
        prop_assert_eq!(again, id);
    }
}
