mod common;

use common::{assert_golden, rendered_prompts};

#[test]
fn rendered_prompts_match_goldens() {
    let prompts = rendered_prompts();
    assert_eq!(prompts.len(), 15);
    for (path, prompt) in &prompts {
        assert_golden(path, prompt);
    }
}

#[test]
fn exemplar_anchors_survive_rendering() {
    let prompts = rendered_prompts();
    let get = |p: &str| &prompts.iter().find(|(k, _)| k == p).unwrap().1;
    assert!(get("prompts/hotpotqa/cot.txt").contains("The answer is 1991."));
    assert!(get("prompts/fever/verifying_question.txt")
        .starts_with("Write a question that validates the reason for a claim."));
    assert!(get("prompts/hotpotqa/verifying_answer.txt").contains("played for Adelaide City"));
    assert!(get("prompts/hotpotqa/reanswer.txt")
        .ends_with("A: John Nyskohus played for Adelaide City in the National Soccer League. The answer is"));
}
