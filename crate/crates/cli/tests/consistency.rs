use simsim_cli::{
    cmd_construct, cmd_decide, cmd_diag, cmd_gen, Arithmetic, Exit, GenKind, Options,
};
use simsim_core::instances::GenSpec;

fn corpus() -> Vec<String> {
    let mut texts = Vec::new();
    for seed in 0..12u64 {
        let n = 2 + (seed % 6) as usize;
        let m = 1 + (seed % 3) as usize;
        let specs = [
            (GenSpec::new(n, m, seed), GenKind::Positive),
            (GenSpec::new(n, m, seed).nonnegative(), GenKind::Positive),
            (GenSpec::new(n, m, seed).float(), GenKind::Positive),
            (GenSpec::new(n, m.max(2), seed), GenKind::Adversarial),
            (GenSpec::new(n, m.min(n), seed), GenKind::DisjointSupport),
        ];
        for (spec, kind) in specs {
            let out = cmd_gen(&spec, kind);
            assert_eq!(out.exit, Exit::Yes, "{spec:?}: {}", out.stderr);
            texts.push(out.stdout);
        }
    }
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    for name in [
        "all_ones.json",
        "single_vector.json",
        "disjoint_indicators.json",
        "positive.json",
        "adversarial.json",
    ] {
        texts.push(std::fs::read_to_string(data.join(name)).unwrap());
    }
    texts
}

#[test]
fn construct_succeeds_exactly_when_decide_does() {
    for arithmetic in [Arithmetic::Auto, Arithmetic::Float] {
        let opts = Options {
            arithmetic,
            ..Options::default()
        };
        for (k, text) in corpus().iter().enumerate() {
            let decided = cmd_decide(text, &opts);
            let built = cmd_construct(text, &opts, k as u64);
            assert_ne!(
                decided.exit,
                Exit::Internal,
                "instance {k}: {}",
                decided.stderr
            );
            assert_ne!(built.exit, Exit::Internal, "instance {k}: {}", built.stderr);
            assert_eq!(
                decided.exit, built.exit,
                "instance {k} under {arithmetic:?}"
            );
            let diag = cmd_diag(text, &opts);
            assert_eq!(diag.exit, Exit::Yes, "instance {k}: {}", diag.stderr);
        }
    }
}
