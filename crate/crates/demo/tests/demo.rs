use reserve_demo::{comparison, reconstruction, Playground};

#[test]
fn reconstruction_follows_the_observation() {
    let lost = reconstruction(0.0, 0.5, -0.7, 0.5, 2.0, 1.5, 0.8).unwrap();
    assert_eq!(lost.censoring, "full");
    assert_eq!(lost.target.len(), lost.levels.len());
    assert!(lost.levels[lost.censor_level] <= 2.0 && lost.levels[lost.censor_level + 1] > 2.0);
    // Floors at or above the censor point would also have lost.
    assert!(lost.target[lost.censor_level..].iter().all(|&r| r == 0.0));
    assert!(lost.target[1] > 0.0);

    let half = reconstruction(0.0, 0.5, -0.7, 0.5, 0.5, 1.5, 0.3).unwrap();
    assert_eq!(half.censoring, "half");
    let seen = reconstruction(0.0, 0.5, -0.7, 0.5, 0.2, 1.5, 0.8).unwrap();
    assert_eq!(seen.censoring, "none");
    assert!(seen
        .target
        .iter()
        .all(|&r| r == 0.0 || (0.8 - 1e-6..=1.5 + 1e-6).contains(&r)));

    for cdf in [&lost.first_cdf, &lost.second_cdf] {
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    }
    assert!(reconstruction(0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 0.5).is_err());
}

#[test]
fn comparison_brackets_engines_between_baselines() {
    let c = comparison(3_000, 5, 0.0).unwrap();
    let avg = |m: &str| c.series.iter().find(|s| s.method == m).unwrap().average;
    assert_eq!(c.series.len(), 6);
    for s in &c.series {
        assert_eq!(s.running.len(), 3_000 / c.every);
        if s.method.starts_with('M') {
            assert!(s.average < avg("ORACLE"));
            assert!(s.censored > 0.0);
        }
    }
    assert!(avg("M1") > avg("NO_RES"));
    let again = comparison(3_000, 5, 0.0).unwrap();
    assert_eq!(
        serde_json::to_string(&c).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}

#[test]
fn playground_learns_one_pair() {
    let mut p = Playground::new("m1", 1).unwrap();
    let start = p.snapshot().unwrap();
    assert_eq!(start.auctions, 0);
    p.feed(400, 0.5, 0.3).unwrap();
    let s = p.snapshot().unwrap();
    assert_eq!(s.auctions, 400);
    assert!(s.revenue > 0.0);
    assert!(s.floor > 0.0);
    let learned = s.first_cdf.unwrap();
    // Most auctions are lost at the chosen floor, so only the shape above
    // it is identified; below it the estimate is flat at the censored mass.
    let at = s.levels.iter().position(|&v| v >= s.floor).unwrap();
    let gap = learned[at..]
        .iter()
        .zip(&s.true_cdf[at..])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 0.1, "learned CDF off by {gap} above the floor");
    let json: serde_json::Value = serde_json::from_str(&p.state().unwrap()).unwrap();
    assert_eq!(json["auctions"], 400);

    assert!(Playground::new("M9", 1).is_err());
    assert!(Playground::new("M2", 1)
        .unwrap()
        .snapshot()
        .unwrap()
        .first_cdf
        .is_none());
}
