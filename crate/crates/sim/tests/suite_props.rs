use std::io::BufReader;
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use duplexkit_core::{validate_log, Control, ModelSlot};
use duplexkit_sim::*;
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = SuiteConfig> {
    (1u32..5, 0u32..4, 0u32..4, any::<u64>(), 1u64..8).prop_flat_map(|(turns, pauses, bcs, seed, wmax)| {
        (0..turns).prop_map(move |barge_ins| SuiteConfig {
            scenarios: 3,
            turns,
            pauses,
            barge_ins,
            backchannels: bcs,
            window: ReactionWindow::new(0, wmax).unwrap(),
            seed,
            ..SuiteConfig::default()
        })
    })
}

/// Control symbol expected from the oracle at every chunk, derived from the
/// event list alone.
fn expected_controls(s: &Scenario) -> Vec<Option<Control>> {
    let mut out = vec![Some(Control::Think); s.horizon() as usize];
    let turn_ends: Vec<_> = s.events_of(EventKind::TurnEnd).collect();
    for (i, te) in &turn_ends {
        let e = te.start_chunk as usize;
        let r = s.label_for(*i).unwrap().response_chunks.unwrap() as usize;
        // a barge-in starting inside this response cuts it short
        let barge = s
            .events_of(EventKind::BargeIn)
            .map(|(_, b)| b.start_chunk as usize)
            .find(|&b| b > e && b <= e + r);
        let brk = barge.map_or(e + r + 1, |b| b + 1);
        out[e] = Some(Control::Shift);
        for c in &mut out[e + 1..brk] {
            *c = None;
        }
        out[brk] = Some(Control::Break);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_scenarios_are_valid_and_counted(cfg in config_strategy()) {
        let suite = generate_suite(&cfg).unwrap();
        prop_assert_eq!(suite.len(), cfg.scenarios);
        prop_assert_eq!(&suite, &generate_suite(&cfg).unwrap());
        for s in &suite {
            prop_assert!(s.validate().is_ok(), "{:?}", s.validate());
            prop_assert_eq!(s.events_of(EventKind::TurnEnd).count(), cfg.turns as usize);
            prop_assert_eq!(s.events_of(EventKind::IntraTurnPause).count(), cfg.pauses as usize);
            prop_assert_eq!(s.events_of(EventKind::BargeIn).count(), cfg.barge_ins as usize);
            prop_assert_eq!(s.events_of(EventKind::Backchannel).count(), cfg.backchannels as usize);
            prop_assert_eq!(frames_of(s).len() as u64, s.horizon());
        }
    }

    #[test]
    fn oracle_follows_the_schedule(cfg in config_strategy()) {
        for s in generate_suite(&cfg).unwrap() {
            let log = run(&s, &mut OraclePolicy::new(&s)).unwrap();
            prop_assert!(validate_log(&log).is_empty());
            let got: Vec<_> = log.chunks.iter().map(|c| c.model.control()).collect();
            prop_assert_eq!(got, expected_controls(&s));
            for c in &log.chunks {
                if let ModelSlot::Speak { text, audio } = &c.model {
                    prop_assert_eq!(*text, 0);
                    prop_assert_eq!(audio.clone(), placeholder_audio(c.index).to_vec());
                }
            }
        }
    }

    #[test]
    fn scenario_files_round_trip(cfg in config_strategy()) {
        let suite = generate_suite(&cfg).unwrap();
        let mut buf = Vec::new();
        duplexkit_sim::scenario::write_scenarios(&mut buf, &suite, None).unwrap();
        let back = duplexkit_sim::scenario::read_scenarios(buf.as_slice()).unwrap();
        prop_assert_eq!(back, suite);
    }
}

#[test]
fn barge_in_at_forty_breaks_at_forty_one() {
    let mut s = Scenario::empty("b", 0);
    s.events = vec![
        ScenarioEvent::new(EventKind::UserSpeech, 2, 10),
        ScenarioEvent::new(EventKind::TurnEnd, 11, 1),
        ScenarioEvent::new(EventKind::BargeIn, 40, 5),
        ScenarioEvent::new(EventKind::UserSpeech, 45, 5),
        ScenarioEvent::new(EventKind::TurnEnd, 49, 1),
    ];
    let w = ReactionWindow::default();
    s.labels = vec![
        Label { event: 1, behavior: Behavior::TurnTaking, window: w, turn_start: Some(2), response_chunks: Some(30), host: None },
        Label { event: 2, behavior: Behavior::Interruption, window: w, turn_start: None, response_chunks: None, host: Some(1) },
        Label { event: 4, behavior: Behavior::TurnTaking, window: w, turn_start: Some(40), response_chunks: Some(5), host: None },
    ];
    s.horizon = Some(60);
    s.validate().unwrap();
    let log = run(&s, &mut OraclePolicy::new(&s)).unwrap();
    assert_eq!(log.chunks[41].model.control(), Some(Control::Break));
    assert_eq!(log.chunks[40].model.control(), None);
    assert_eq!(log.chunks[49].model.control(), Some(Control::Shift));
}

#[test]
fn threshold_three_shifts_inside_a_five_chunk_pause() {
    let mut s = Scenario::empty("p", 0);
    s.events = vec![
        ScenarioEvent::new(EventKind::UserSpeech, 0, 6),
        ScenarioEvent::new(EventKind::IntraTurnPause, 6, 5),
        ScenarioEvent::new(EventKind::UserSpeech, 11, 6),
        ScenarioEvent::new(EventKind::TurnEnd, 16, 1),
    ];
    let w = ReactionWindow::default();
    s.labels = vec![
        Label { event: 1, behavior: Behavior::PauseHandling, window: w, turn_start: None, response_chunks: None, host: None },
        Label { event: 3, behavior: Behavior::TurnTaking, window: w, turn_start: Some(0), response_chunks: Some(8), host: None },
    ];
    s.horizon = None;
    assert_eq!(s.horizon(), 26);
    let log = run(&s, &mut ThresholdPolicy::new(3)).unwrap();
    assert_eq!(log.chunks[8].model.control(), Some(Control::Shift));
    let log = run(&s, &mut ThresholdPolicy::new(10)).unwrap();
    assert!(log.chunks[..17].iter().all(|c| c.model.control() == Some(Control::Think)));
}

#[test]
fn empty_scenario_gives_empty_log() {
    let s = Scenario::empty("e", 0);
    assert!(run(&s, &mut ThresholdPolicy::new(1)).unwrap().chunks.is_empty());
    assert!(run(&s, &mut OraclePolicy::new(&s)).unwrap().chunks.is_empty());
}

#[test]
fn oracle_over_tcp_matches_in_process() {
    let cfg = SuiteConfig { scenarios: 1, turns: 4, pauses: 2, barge_ins: 1, backchannels: 2, seed: 11, ..SuiteConfig::default() };
    let s = generate_suite(&cfg).unwrap().remove(0);
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let peer_scenario = s.clone();
    let server = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut policy = OraclePolicy::new(&peer_scenario);
        serve_policy(&mut policy, BufReader::new(stream.try_clone().unwrap()), stream).unwrap()
    });
    let spec: PolicySpec = format!("external:{addr}").parse().unwrap();
    let mut remote = spec.instantiate(&s, Duration::from_secs(5)).unwrap();
    let over_wire = run(&s, &mut remote).unwrap();
    drop(remote);
    assert_eq!(server.join().unwrap(), s.horizon());
    let local = run(&s, &mut OraclePolicy::new(&s)).unwrap();
    assert_eq!(over_wire, local);
}

#[test]
fn suite_results_are_sorted_and_independent_of_threads() {
    let cfg = SuiteConfig { scenarios: 30, backchannels: 1, barge_ins: 1, seed: 5, ..SuiteConfig::default() };
    let mut suite = generate_suite(&cfg).unwrap();
    suite.reverse();
    let spec = PolicySpec::Threshold { silence_chunks: 4, response_chunks: 3 };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| run_suite(&suite, &spec, Duration::from_secs(1)));
    let b = run_suite(&suite, &spec, Duration::from_secs(1));
    assert!(a.errors.is_empty());
    assert_eq!(a.logs, b.logs);
    let sids: Vec<_> = a.logs.iter().map(|l| l.session_id.clone()).collect();
    let mut sorted = sids.clone();
    sorted.sort();
    assert_eq!(sids, sorted);
}
