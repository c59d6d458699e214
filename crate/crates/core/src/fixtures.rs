//! Demo inputs regenerated from the library. The repository copies under
//! `fixtures/` must match [`all`] byte for byte.

use crate::error::Result;
use crate::io;
use crate::quantum::{self, gates, MeasurementFamily, PureState};
use crate::scalar::Rational;
use crate::scenario::{boxes, Behavior, Scenario};
use crate::stabilizer::{self, Protocol, Step, SMOLIN_PARTIES};

/// Two-party table whose party-1 marginal follows party 0's setting.
pub fn signaling_box() -> Behavior<Rational> {
    let sc = Scenario::uniform(2, 2, 2).expect("valid scenario");
    Behavior::from_fn(sc, |x, a| {
        let hit = a[0] == x[0] && a[1] == x[0];
        if hit { Rational::from(1) } else { Rational::from(0) }
    })
}

/// PR box on parties 1 and 2 with an independent uniform party 0.
pub fn pr_on_last_two() -> Behavior<Rational> {
    let sc = Scenario::uniform(1, 2, 2).expect("valid scenario");
    boxes::uniform::<Rational>(&sc).tensor(&boxes::pr_box()).expect("tensor of valid boxes")
}

pub fn ghz_xy_measurements() -> MeasurementFamily {
    MeasurementFamily::from_observables(vec![vec![gates::x(), gates::y()]; 3]).expect("Pauli observables")
}

/// `(relative path, contents)` for every shipped fixture, in a fixed order.
pub fn all() -> Result<Vec<(String, String)>> {
    let mut out = vec![
        ("behaviors/pr_box.json".to_string(), io::behavior_json(&boxes::pr_box::<Rational>())),
        (
            "behaviors/deterministic_box.json".to_string(),
            io::behavior_json(&boxes::deterministic::<Rational>(&Scenario::uniform(2, 2, 2)?, &[vec![0, 1], vec![1, 1]])),
        ),
        ("behaviors/tsirelson_box.json".to_string(), io::behavior_json(&quantum::tsirelson_box())),
        ("behaviors/mermin_box.json".to_string(), io::behavior_json(&boxes::mermin_box::<Rational>())),
        ("behaviors/svetlichny_box.json".to_string(), io::behavior_json(&boxes::svetlichny_box::<Rational>())),
        ("behaviors/pr_on_last_two.json".to_string(), io::behavior_json(&pr_on_last_two())),
        ("behaviors/signaling.json".to_string(), io::behavior_json(&signaling_box())),
        ("states/singlet.json".to_string(), io::state_json(&PureState::singlet())),
        ("states/ghz3.json".to_string(), io::state_json(&PureState::ghz(3)?)),
        ("measurements/chsh.json".to_string(), io::measurements_json(&quantum::chsh_measurements())),
        ("measurements/ghz_xy.json".to_string(), io::measurements_json(&ghz_xy_measurements())),
        (
            "protocols/ghz3_x_on_1.json".to_string(),
            io::protocol_json(&Protocol::new(vec![Step::new("1", "X_(1)")?])),
        ),
        (
            "protocols/ghz3_z_on_1.json".to_string(),
            io::protocol_json(&Protocol::new(vec![Step::new("1", "Z_(1)")?])),
        ),
    ];
    for m in 3..=6 {
        out.push((format!("graphs/k{m}.json"), io::graph_json(&stabilizer::complete_graph(m))));
    }
    for i in 0..5 {
        for j in i + 1..5 {
            let (protocol, _) = stabilizer::smolin_pair_protocol(i, j)?;
            out.push((
                format!("protocols/smolin/{}-{}.json", SMOLIN_PARTIES[i], SMOLIN_PARTIES[j]),
                io::protocol_json(&protocol),
            ));
        }
    }
    Ok(out)
}
