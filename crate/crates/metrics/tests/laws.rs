use duplexkit_core::{Control, DuplexLog, Mode, Observation, PolicyDecision, PolicyError, ResponsePolicy};
use duplexkit_metrics::{aggregate, score_session, score_suite};
use duplexkit_sim::*;
use proptest::prelude::*;

fn suite_strategy(with_overlaps: bool) -> impl Strategy<Value = SuiteConfig> {
    (1u32..5, 0u32..5, 0u32..4, any::<u64>()).prop_flat_map(move |(turns, pauses, bcs, seed)| {
        (0..turns).prop_map(move |barge_ins| SuiteConfig {
            scenarios: 4,
            turns,
            pauses,
            barge_ins: if with_overlaps { barge_ins } else { 0 },
            backchannels: if with_overlaps { bcs } else { 0 },
            seed,
            ..SuiteConfig::default()
        })
    })
}

fn run_all<F>(suite: &[Scenario], mut make: F) -> Vec<DuplexLog>
where
    F: FnMut(&Scenario) -> Box<dyn ResponsePolicy>,
{
    suite.iter().map(|s| run(s, &mut make(s)).unwrap()).collect()
}

/// Shifts on a random subset of voiced-to-silent edges and yields at random.
struct Coin(u64);

impl Coin {
    fn flip(&mut self) -> bool {
        self.0 = duplexkit_core::seed::mix64(self.0);
        self.0 & 3 == 0
    }
}

impl ResponsePolicy for Coin {
    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let heads = self.flip();
        Ok(match obs.state.mode {
            Mode::Listening if heads => PolicyDecision::TakeTurn,
            Mode::Listening => PolicyDecision::Hold,
            Mode::Speaking if heads => PolicyDecision::Yield,
            Mode::Speaking => PolicyDecision::Continue { text: 0, audio: placeholder_audio(obs.state.chunk_index) },
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_scores_perfectly(cfg in suite_strategy(true)) {
        let suite = generate_suite(&cfg).unwrap();
        let logs = run_all(&suite, |s| Box::new(OraclePolicy::new(s)));
        let set = score_suite(&logs, &suite, cfg.window).unwrap();
        prop_assert!(set.defects.is_empty());
        let report = aggregate(&set.outcomes, &set.defects);
        for b in Behavior::ALL {
            let st = report.stats(b).unwrap();
            prop_assert_eq!(st.successes, st.total);
        }
        let expected_total = (cfg.turns + cfg.pauses + cfg.barge_ins + cfg.backchannels) as usize * suite.len();
        prop_assert_eq!(set.outcomes.len(), expected_total);
    }

    #[test]
    fn threshold_pause_rate_matches_pause_lengths(cfg in suite_strategy(true), t in 1u64..10) {
        let suite = generate_suite(&cfg).unwrap();
        let logs = run_all(&suite, |_| Box::new(ThresholdPolicy::new(t)));
        let set = score_suite(&logs, &suite, cfg.window).unwrap();
        let failed = set.outcomes.iter().filter(|o| o.behavior == Behavior::PauseHandling && !o.success).count();
        let long_pauses = suite
            .iter()
            .flat_map(|s| s.events.iter())
            .filter(|e| e.kind == EventKind::IntraTurnPause && e.length_chunks >= t)
            .count();
        prop_assert_eq!(failed, long_pauses);
    }

    #[test]
    fn wider_window_never_loses_successes(cfg in suite_strategy(true), seed in any::<u64>(), wmax in 0u64..10, extra in 0u64..10) {
        let suite = generate_suite(&cfg).unwrap();
        let mut n = 0;
        let logs = run_all(&suite, |_| { n += 1; Box::new(Coin(seed ^ n)) });
        let narrow = ReactionWindow::new(0, wmax).unwrap();
        let wide = ReactionWindow::new(0, wmax + extra).unwrap();
        let count = |w, b| {
            score_suite(&logs, &suite, w).unwrap().outcomes.iter().filter(|o| o.behavior == b && o.success).count()
        };
        for b in [Behavior::TurnTaking, Behavior::Interruption] {
            prop_assert!(count(wide, b) >= count(narrow, b));
        }
    }

    #[test]
    fn backchannel_rate_matches_log_scan(cfg in suite_strategy(true), seed in any::<u64>()) {
        let suite = generate_suite(&cfg).unwrap();
        let mut n = 0;
        let logs = run_all(&suite, |_| { n += 1; Box::new(Coin(seed.wrapping_add(n))) });
        let w = cfg.window;
        let (mut survived, mut scored) = (0, 0);
        for (s, log) in suite.iter().zip(&logs) {
            // replay the mode chunk by chunk
            let mut speaking = vec![false; log.chunks.len() + 1];
            for (k, c) in log.chunks.iter().enumerate() {
                speaking[k + 1] = match c.model.control() {
                    Some(Control::Shift) => true,
                    Some(Control::Break) => false,
                    Some(Control::Think) => false,
                    None => true,
                };
            }
            for (i, bc) in s.events_of(EventKind::Backchannel) {
                let o = bc.start_chunk as usize;
                let breaks = |from: usize, to: usize| {
                    log.chunks[from..to.min(log.chunks.len())]
                        .iter()
                        .any(|c| c.model.control() == Some(Control::Break))
                };
                if speaking[o] {
                    scored += 1;
                    let guard = bc.end() as usize + w.max_delay_chunks as usize + 1;
                    if !breaks(o, guard) {
                        survived += 1;
                    }
                } else {
                    let host = s.label_for(i).unwrap().host.unwrap();
                    if breaks(s.events[host].start_chunk as usize, o) {
                        scored += 1;
                    }
                }
            }
        }
        let report = {
            let set = score_suite(&logs, &suite, w).unwrap();
            aggregate(&set.outcomes, &set.defects)
        };
        let st = report.stats(Behavior::Backchanneling).unwrap();
        prop_assert_eq!((st.successes, st.total), (survived, scored));
        if scored > 0 {
            prop_assert_eq!(st.rate, Some(survived as f64 / scored as f64));
        }
    }
}

#[test]
fn policy_yielding_on_any_overlap_fails_every_backchannel() {
    struct Skittish;
    impl ResponsePolicy for Skittish {
        fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
            Ok(match (obs.state.mode, obs.frame.vad, obs.frame.annotation) {
                (Mode::Listening, _, Some(duplexkit_core::Annotation::TurnEnd)) => PolicyDecision::TakeTurn,
                (Mode::Listening, _, _) => PolicyDecision::Hold,
                (Mode::Speaking, true, _) => PolicyDecision::Yield,
                (Mode::Speaking, false, _) => PolicyDecision::Continue { text: 0, audio: [0; 4] },
            })
        }
    }
    let cfg = SuiteConfig { scenarios: 20, turns: 3, backchannels: 4, seed: 1, ..SuiteConfig::default() };
    let suite = generate_suite(&cfg).unwrap();
    let mut total = 0;
    for s in &suite {
        let log = run(s, &mut Skittish).unwrap();
        let set = score_session(&log, s, cfg.window).unwrap();
        for o in set.outcomes.iter().filter(|o| o.behavior == Behavior::Backchanneling) {
            assert!(!o.success);
            total += 1;
        }
    }
    assert!(total > 0);
}
