use nmchase_bench::{chain, choice_program, foldable, RULE_SETS};
use nmchase_core::chase::{run, Budget, Criterion};
use nmchase_core::logic::core;
use nmchase_core::nonmonotonic::{stable_sets, TreeBudget};
use nmchase_core::parser::parse;

#[test]
fn inputs_are_well_formed() {
    let kb = chain(4);
    assert_eq!(kb.rules.len(), 3);
    assert!(run(&kb.facts, &kb.positive_rules(), Criterion::Restricted, Budget::default()).terminated());
    assert_eq!(core(&foldable(3)).len(), 3);
    for (name, text) in RULE_SETS {
        assert!(parse(text).is_ok(), "{name}");
    }
    let kb = choice_program(3);
    let s = stable_sets(&kb.facts, &kb.rules, Criterion::Skolem, TreeBudget::default()).unwrap();
    assert!(s.exhaustive);
    assert_eq!(s.sets.len(), 8);
}
