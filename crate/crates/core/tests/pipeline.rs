use polybohr::bohrradii::{majorant_h, majorant_mh};
use polybohr::fockmodel::io::polynomial_from_json;
use polybohr::fockmodel::{assemble, Scaling};
use polybohr::opanalysis::operator_norm;
use polybohr::verification::{run_named, SuiteConfig, SUITE_NAMES};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = SuiteConfig { trials: 24, ..Default::default() };
    for name in ["wiener", "fejer", "re_bridge"] {
        let one = in_pool(1, || run_named(name, &cfg).unwrap());
        let four = in_pool(4, || run_named(name, &cfg).unwrap());
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap(), "{name}");
        assert!(one.pass, "{one}");
    }
}

#[test]
fn every_suite_name_dispatches() {
    let cfg = SuiteConfig { trials: 2, ..Default::default() };
    for name in SUITE_NAMES {
        let r = run_named(name, &cfg).unwrap();
        assert_eq!(r.name, *name);
        assert!(r.pass, "{r}");
    }
    assert!(run_named("missing", &cfg).is_err());
}

#[test]
fn file_to_majorants() {
    // 1/2 + 0.3 S_1 + 0.4 S_2 + 0.2 S_1 S_2 on one ball with two letters.
    let f = polynomial_from_json(
        r#"{"n":[2],"m":1,"terms":[
            {"word":[[]],"coeff":[[[0.5,0]]]},
            {"word":[[1]],"coeff":[[[0.3,0]]]},
            {"word":[[2]],"coeff":[[[0,0.4]]]},
            {"word":[[1,2]],"coeff":[[[0.2,0]]]}]}"#,
    )
    .unwrap();
    let trunc = f.truncation_with_headroom(2).unwrap();
    for r in [0.0, 0.25, 0.6, 1.0] {
        let expected = 0.5 + 0.5 * r + 0.2 * r * r;
        let mh = majorant_mh(&f, &Scaling::Uniform(r), &trunc, 1e-12).unwrap();
        let h = majorant_h(&f, &Scaling::Uniform(r), &trunc, 1e-12).unwrap();
        assert!((mh - expected).abs() < 1e-10, "r = {r}: {mh}");
        assert!((h - expected).abs() < 1e-10, "r = {r}: {h}");
        let a = assemble(&f, &Scaling::Uniform(r), &trunc).unwrap();
        let norm = operator_norm(&a, 1e-12).unwrap().value;
        assert!(norm <= expected + 1e-10);
    }
}
