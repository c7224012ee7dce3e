//! Scenario to user-frame rendering.

use duplexkit_core::seed::derive_seed;
use duplexkit_core::{Annotation, UserFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{EventKind, Scenario};

pub const DEFAULT_FEATURE_DIM: usize = 16;

/// Renders one annotated frame per chunk of the scenario horizon.
pub fn frames_of(scenario: &Scenario) -> Vec<UserFrame> {
    frames_of_dim(scenario, DEFAULT_FEATURE_DIM)
}

/// Like [`frames_of`] with `dim` feature values per frame. Features are
/// seeded noise, louder where the user is voiced.
pub fn frames_of_dim(scenario: &Scenario, dim: usize) -> Vec<UserFrame> {
    let horizon = scenario.horizon() as usize;
    let mut marks = vec![(false, Annotation::Silence); horizon];
    let mut turn_ends = Vec::new();
    for ev in &scenario.events {
        let mark = match ev.kind {
            EventKind::UserSpeech => (true, Annotation::TurnSpeech),
            EventKind::IntraTurnPause => (false, Annotation::IntraTurnPause),
            EventKind::BargeIn => (true, Annotation::BargeIn),
            EventKind::Backchannel => (true, Annotation::Backchannel),
            EventKind::TurnEnd => {
                turn_ends.push(ev.start_chunk as usize);
                continue;
            }
        };
        for m in marks.iter_mut().take(ev.end() as usize).skip(ev.start_chunk as usize) {
            *m = mark;
        }
    }
    for c in turn_ends {
        if let Some(m) = marks.get_mut(c) {
            m.1 = Annotation::TurnEnd;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scenario.seed, "features", 0));
    marks
        .into_iter()
        .map(|(vad, ann)| {
            let scale = if vad { 1.0f32 } else { 0.05 };
            let feature = (0..dim)
                .map(|_| rng.random_range(-1.0f32..1.0) * scale)
                .collect();
            UserFrame {
                feature,
                vad,
                annotation: Some(ann),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioEvent;

    fn scenario() -> Scenario {
        let mut s = Scenario::empty("t", 1);
        s.events = vec![
            ScenarioEvent::new(EventKind::UserSpeech, 1, 3),
            ScenarioEvent::new(EventKind::IntraTurnPause, 4, 2),
            ScenarioEvent::new(EventKind::UserSpeech, 6, 2),
            ScenarioEvent::new(EventKind::TurnEnd, 7, 1),
        ];
        s.horizon = Some(10);
        s
    }

    #[test]
    fn annotations_follow_events() {
        let f = frames_of(&scenario());
        assert_eq!(f.len(), 10);
        let anns: Vec<_> = f.iter().map(|u| u.annotation.unwrap()).collect();
        use Annotation::*;
        assert_eq!(
            anns,
            [Silence, TurnSpeech, TurnSpeech, TurnSpeech, IntraTurnPause, IntraTurnPause,
             TurnSpeech, TurnEnd, Silence, Silence]
        );
        let vad: Vec<_> = f.iter().map(|u| u.vad).collect();
        assert_eq!(vad, [false, true, true, true, false, false, true, true, false, false]);
        assert!(f.iter().all(|u| u.feature.len() == DEFAULT_FEATURE_DIM));
    }

    #[test]
    fn features_are_deterministic() {
        assert_eq!(frames_of_dim(&scenario(), 4), frames_of_dim(&scenario(), 4));
        assert!(frames_of(&Scenario::empty("e", 0)).is_empty());
    }
}
