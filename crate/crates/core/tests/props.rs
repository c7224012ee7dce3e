use duplexkit_core::*;
use proptest::prelude::*;
use regex::Regex;

fn slot_strategy() -> impl Strategy<Value = ModelSlot> {
    prop_oneof![
        Just(ModelSlot::Think),
        Just(ModelSlot::Shift),
        Just(ModelSlot::Break),
        (any::<u32>(), prop::collection::vec(0u32..AUDIO_CODEBOOK_SIZE, 4))
            .prop_map(|(text, audio)| ModelSlot::Speak { text, audio }),
    ]
}

fn annotation_strategy() -> impl Strategy<Value = Option<Annotation>> {
    prop::option::of(prop_oneof![
        Just(Annotation::TurnSpeech),
        Just(Annotation::IntraTurnPause),
        Just(Annotation::TurnEnd),
        Just(Annotation::BargeIn),
        Just(Annotation::Backchannel),
        Just(Annotation::Silence),
    ])
}

fn log_from(slots: Vec<ModelSlot>, user: Vec<(bool, Option<Annotation>, Vec<f32>)>) -> DuplexLog {
    let mut log = DuplexLog::new("p", 17);
    for (i, (model, (vad, annotation, feature))) in slots.into_iter().zip(user).enumerate() {
        log.chunks.push(ChunkRecord {
            index: i as u64,
            user: UserFrame { feature, vad, annotation },
            model,
        });
    }
    log
}

/// Grammar oracle: the slot string must be a prefix of
/// THINK* (SHIFT SPEAK* BREAK THINK*)*.
fn grammar_ok(slots: &[ModelSlot]) -> bool {
    let s: String = slots
        .iter()
        .map(|m| match m {
            ModelSlot::Think => 'T',
            ModelSlot::Shift => 'H',
            ModelSlot::Speak { .. } => 'S',
            ModelSlot::Break => 'B',
        })
        .collect();
    Regex::new(r"^T*(HS*BT*)*(HS*)?$").unwrap().is_match(&s)
}

proptest! {
    #[test]
    fn encoder_frames_match_float_ceiling(n in 0u64..=10_000) {
        prop_assert_eq!(frames_from_encoder(n), (n as f64 / 8.0).ceil() as u64);
    }

    #[test]
    fn validator_agrees_with_grammar_oracle(slots in prop::collection::vec(slot_strategy(), 0..40)) {
        let n = slots.len();
        let log = log_from(slots.clone(), vec![(false, None, vec![]); n]);
        prop_assert_eq!(validate_log(&log).is_empty(), grammar_ok(&slots));
    }

    #[test]
    fn bad_arity_is_always_reported(k in 0usize..8, at in 0usize..5) {
        prop_assume!(k != 4);
        let mut slots = vec![ModelSlot::Shift, ModelSlot::speak(0, [0; 4]), ModelSlot::speak(0, [0; 4]), ModelSlot::speak(0, [0; 4]), ModelSlot::speak(0, [0; 4])];
        let at = 1 + at % 4;
        slots[at] = ModelSlot::Speak { text: 1, audio: vec![5; k] };
        let log = log_from(slots, vec![(true, None, vec![]); 5]);
        let v = validate_log(&log);
        prop_assert!(v.iter().any(|x| x.rule == Rule::AudioArity && x.chunk == at as u64));
    }

    #[test]
    fn logs_round_trip(
        slots in prop::collection::vec(slot_strategy(), 0..30),
        user in prop::collection::vec((any::<bool>(), annotation_strategy(), prop::collection::vec(-1e6f32..1e6, 0..4)), 30),
    ) {
        let log = log_from(slots, user);
        let text = log.to_jsonl(FeatureMode::Inline);
        let back = DuplexLog::from_jsonl(&text).unwrap();
        prop_assert_eq!(&back, &log);
        prop_assert_eq!(back.to_jsonl(FeatureMode::Inline), text);

        let slim = DuplexLog::from_jsonl(&log.to_jsonl(FeatureMode::Omit)).unwrap();
        prop_assert!(slim.chunks.iter().all(|c| c.user.feature.is_empty()));
        prop_assert_eq!(slim.slots().collect::<Vec<_>>(), log.slots().collect::<Vec<_>>());
    }

    /// Any policy that only makes legal moves yields a grammatical log with
    /// per-slot arity intact; illegal moves stop the session with the partial
    /// log still valid.
    #[test]
    fn engine_output_is_always_valid(choices in prop::collection::vec(0u8..4, 0..60), vads in prop::collection::vec(any::<bool>(), 60)) {
        struct Scripted(Vec<u8>, usize);
        impl ResponsePolicy for Scripted {
            fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
                let c = self.0.get(self.1).copied().unwrap_or(0);
                self.1 += 1;
                Ok(match c {
                    0 => PolicyDecision::Hold,
                    1 => PolicyDecision::TakeTurn,
                    2 => PolicyDecision::Continue { text: 1, audio: [obs.state.chunk_index as u32 % AUDIO_CODEBOOK_SIZE; 4] },
                    _ => PolicyDecision::Yield,
                })
            }
        }
        let n = choices.len();
        let frames = vads.into_iter().take(n).map(UserFrame::new);
        let log = match run_session("e", 0, frames, &mut Scripted(choices, 0), EngineConfig::default()) {
            Ok(log) => log,
            Err(e) => {
                let illegal = matches!(e.error, EngineError::IllegalDecision { .. });
                prop_assert!(illegal);
                e.partial
            }
        };
        prop_assert!(validate_log(&log).is_empty());
        for c in &log.chunks {
            let tokens = c.model.tokens();
            let audio = tokens.iter().filter(|t| matches!(t, Token::Audio(_))).count();
            let text = tokens.iter().filter(|t| matches!(t, Token::Text(_))).count();
            let control = tokens.iter().filter(|t| matches!(t, Token::Control(_))).count();
            prop_assert!((audio, text, control) == (4, 1, 0) || (audio, text, control) == (0, 0, 1));
        }
    }
}

#[test]
fn time_base_identities() {
    assert!(TimeBase::default().check().is_empty());
    assert_eq!(frames_from_encoder(800), 100);
    assert_eq!(frames_from_encoder(9), 2);
    assert_eq!(frames_from_encoder(0), 0);
}
