mod common;

use common::scenario_pipeline;
use vecot::demo::{club_pack, nyskohus_scenario, NYSKOHUS_EVIDENCE, NYSKOHUS_RIGHT, NYSKOHUS_WRONG};
use vecot::editor::{Method, StepFallback};

#[test]
fn club_pack_is_fully_scripted() {
    let pack = club_pack(40).unwrap();
    let (pipeline, backend) = scenario_pipeline(&pack);
    let traces = pipeline.run_batch(&pack.instances, Method::VerifyEdit, 4, |_, _| {});
    for t in &traces {
        let r = t.report.as_ref().unwrap();
        assert!(t.failure.is_none());
        assert_eq!(t.edited, r.weighted_score < 3.0, "{}", t.id);
        for s in &t.steps {
            assert!(!matches!(
                s.fallback,
                Some(StepFallback::QuestionBackendError | StepFallback::AnswerBackendError)
            ));
        }
    }
    assert_eq!(
        backend.usage_served(),
        traces.iter().fold(Default::default(), |a, t| a + t.usage)
    );
}

#[test]
fn nyskohus_scenario_corrects_the_answer() {
    let sc = nyskohus_scenario().unwrap();
    let (pipeline, _) = scenario_pipeline(&sc);
    let t = pipeline.run_instance(&sc.instances[0]);
    assert!(t.edited);
    assert_eq!(t.report.as_ref().unwrap().top_answer, NYSKOHUS_WRONG);
    assert_eq!(t.final_answer, NYSKOHUS_RIGHT);
    let ev = t.steps[0].evidence.as_ref().unwrap();
    assert!(ev.top_sentences.iter().any(|s| s.sentence.contains(NYSKOHUS_EVIDENCE)));
    assert!(t.edited_rationale.as_ref().unwrap().contains(NYSKOHUS_EVIDENCE));
}
