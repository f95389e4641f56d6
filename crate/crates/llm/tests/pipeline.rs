use std::sync::{Arc, Mutex};
use std::time::Duration;

use cohere_core::eval::{score_attempt, score_text, Flag, WeightMode};
use cohere_core::gen::{generate_problem, BenchmarkConfig, BenchmarkProblem, Sparsity};
use cohere_core::model::Regime;
use cohere_core::{median_consensus, SignedGraph};
use cohere_llm::client::{Client, Job};
use cohere_llm::transport::{oracle_graph, MockKind, MockTransport};
use cohere_llm::{build_benchmark_prompt, build_practical_prompt, EndpointConfig, LlmError};

fn problem(n: usize, sparsity: Sparsity, seed: u64) -> BenchmarkProblem {
    generate_problem(&format!("{}-n{n:02}-0", sparsity.as_str()), n, sparsity, &BenchmarkConfig::default(), seed).unwrap()
}

fn client(kind: MockKind) -> (Client, Arc<MockTransport>) {
    let t = Arc::new(MockTransport::new(kind));
    (Client::with_transport(EndpointConfig::mock("test"), t.clone()), t)
}

#[test]
fn oracle_mock_scores_one_in_every_regime() {
    let (client, _) = client(MockKind::Oracle);
    for (k, sparsity) in [(0, Sparsity::Sparse), (1, Sparsity::Dense)] {
        let p = problem(9, sparsity, 40 + k);
        for regime in Regime::ALL {
            let bundle = build_benchmark_prompt(&p, regime).unwrap();
            let c = client.complete(&bundle, 0).unwrap();
            let report = score_attempt(&p, regime, &c.text, "mock").unwrap();
            assert_eq!(report.micro_f1, 1.0, "{} {regime}", p.id);
            assert!(report.flags.is_empty());
        }
    }
}

#[test]
fn inverted_mock_scores_the_non_edge_fraction() {
    let (client, _) = client(MockKind::Inverted);
    let p = problem(11, Sparsity::Sparse, 5);
    let c = client.complete(&build_benchmark_prompt(&p, Regime::High).unwrap(), 0).unwrap();
    let report = score_attempt(&p, Regime::High, &c.text, "mock").unwrap();
    let pairs = (p.graph.len() * (p.graph.len() - 1) / 2) as f64;
    let expected = 1.0 - p.graph.edge_count() as f64 / pairs;
    assert!((report.micro_f1 - expected).abs() < 1e-12);
    assert_eq!(report.confusion.0[0][2] + report.confusion.0[2][0], p.graph.edge_count() as u64);
}

#[test]
fn prose_and_hallucination_are_flagged() {
    let p = problem(7, Sparsity::Dense, 2);
    let bundle = build_benchmark_prompt(&p, Regime::Base).unwrap();

    let (prose, _) = client(MockKind::Prose);
    let r = score_attempt(&p, Regime::Base, &prose.complete(&bundle, 0).unwrap().text, "m").unwrap();
    assert!(r.flags.contains(&Flag::ParseFailed));
    assert_eq!(r.micro_f1, 0.0);

    let (hall, _) = client(MockKind::Hallucinate);
    let r = score_attempt(&p, Regime::Base, &hall.complete(&bundle, 0).unwrap().text, "m").unwrap();
    assert!(r.flags.contains(&Flag::Hallucinated));
    assert!(r.excluded);
}

#[test]
fn fixed_echo_of_truth_closes_the_loop() {
    let p = problem(5, Sparsity::Sparse, 8);
    let text = cohere_core::eval::render_benchmark_edge_list(&p.graph);
    let (c, _) = client(MockKind::Fixed(text));
    let out = c.complete(&build_benchmark_prompt(&p, Regime::Zero).unwrap(), 0).unwrap();
    assert_eq!(score_attempt(&p, Regime::Zero, &out.text, "m").unwrap().micro_f1, 1.0);
}

#[test]
fn flaky_transport_recovers_within_retry_budget() {
    let mut config = EndpointConfig::mock("flaky");
    config.max_retries = 3;
    let t = Arc::new(MockTransport::new(MockKind::Flaky { failures: 2 }));
    let slept = Arc::new(Mutex::new(Vec::new()));
    let s = Arc::clone(&slept);
    let client = Client::with_transport(config, t.clone()).with_sleeper(Arc::new(move |d| s.lock().unwrap().push(d)));
    let p = problem(7, Sparsity::Sparse, 1);
    let c = client.complete(&build_benchmark_prompt(&p, Regime::Base).unwrap(), 0).unwrap();
    assert_eq!(c.tries, 3);
    assert_eq!(t.stats().calls(), 3);
    assert_eq!(slept.lock().unwrap().len(), 2);
}

#[test]
fn concurrency_limit_is_respected() {
    for limit in [1, 3] {
        let mut config = EndpointConfig::mock("oracle");
        config.concurrency = limit;
        let t = Arc::new(MockTransport::new(MockKind::Oracle).with_delay(Duration::from_millis(15)));
        let client = Client::with_transport(config, t.clone());
        let p = problem(7, Sparsity::Sparse, 3);
        let jobs: Vec<Job> = (0..12)
            .map(|k| Job { bundle: build_benchmark_prompt(&p, Regime::Base).unwrap(), attempt: k })
            .collect();
        let seen = Mutex::new(0);
        let results = client.complete_all(&jobs, |_, r| {
            assert!(r.is_ok());
            *seen.lock().unwrap() += 1;
        });
        assert_eq!(results.len(), 12);
        assert_eq!(*seen.lock().unwrap(), 12);
        assert_eq!(t.stats().calls(), 12);
        assert!(t.stats().max_in_flight() <= limit);
        assert_eq!(t.stats().max_in_flight(), limit, "the delay should saturate the pool");
    }
}

#[test]
fn thirty_noisy_practical_responses_feed_the_consensus() {
    let props: Vec<(String, String)> = (1..=12).map(|i| (format!("p{i}"), format!("statement number {i}"))).collect();
    let bundle = build_practical_prompt("melian", &props).unwrap();
    let (client, t) = client(MockKind::Noisy { flip: 0.2 });
    let jobs: Vec<Job> = (0..30).map(|k| Job { bundle: bundle.clone(), attempt: k }).collect();
    let results = client.complete_all(&jobs, |_, _| {});
    assert_eq!(t.stats().calls(), 30);

    let labels: Vec<String> = props.iter().map(|(l, _)| l.clone()).collect();
    let empty = SignedGraph::new(labels.iter().cloned()).unwrap();
    let graphs: Vec<SignedGraph> = results
        .into_iter()
        .map(|r| score_text(&empty, &r.unwrap().text, WeightMode::Practical).unwrap().predicted)
        .collect();
    assert_eq!(graphs.len(), 30);
    assert!(graphs.windows(2).any(|w| w[0] != w[1]), "attempts should differ");
    let median = median_consensus(&graphs).unwrap();
    assert_eq!(median.len(), 12);

    // Same nonce, same answer: the mock is deterministic per attempt.
    let again = client.complete(&bundle, 4).unwrap().text;
    assert_eq!(again, client.complete(&bundle, 4).unwrap().text);
}

#[test]
fn oracle_graph_matches_truth_for_benchmark_prompts() {
    let p = problem(13, Sparsity::Dense, 77);
    for regime in Regime::ALL {
        let g = oracle_graph(&build_benchmark_prompt(&p, regime).unwrap().text, 0).unwrap();
        assert_eq!(g, p.graph);
    }
}

#[test]
fn missing_credentials_are_a_config_error() {
    let config = EndpointConfig {
        base_url: "https://example.invalid/v1".into(),
        api_key_env: Some("COHERE_LLM_TEST_UNSET_KEY".into()),
        ..EndpointConfig::mock("x")
    };
    assert!(matches!(Client::from_config(config), Err(LlmError::Config(_))));
}
