//! Deterministic text/CSV/JSON formatting for detection reports and sweeps.

use gmedet::moments::{HankelReport, MomentVector};
use gmedet::Verdict;
use serde_json::json;

/// A numeric field as decimal text with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Violated => "violated",
        Verdict::Satisfied => "satisfied",
    }
}

pub fn map_verdict_str(detected: bool) -> &'static str {
    if detected {
        "GME-detected"
    } else {
        "not-detected"
    }
}

pub struct DetectReport {
    pub state_label: String,
    pub map_label: String,
    pub min_eig: f64,
    pub map_detected: bool,
    pub moments: MomentVector,
    pub hankel: HankelReport,
}

impl DetectReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("state:   {}\n", self.state_label));
        out.push_str(&format!("map:     {}\n", self.map_label));
        out.push_str(&format!("min_eig: {}\n", fmt_sig(self.min_eig)));
        for (k, s) in self.moments.values().iter().enumerate() {
            out.push_str(&format!("s_{}:     {}\n", k + 1, fmt_sig(*s)));
        }
        for l in 1..=self.hankel.max_order {
            out.push_str(&format!(
                "det H_{l}: {}  [{}]\n",
                fmt_sig(self.hankel.det(l)),
                verdict_str(self.hankel.verdict(l))
            ));
        }
        out.push_str(&format!(
            "verdict: map-eig={}",
            map_verdict_str(self.map_detected)
        ));
        for l in 1..=self.hankel.max_order {
            out.push_str(&format!(" H{l}={}", verdict_str(self.hankel.verdict(l))));
        }
        out.push('\n');
        out
    }

    pub fn json(&self) -> serde_json::Value {
        let mut verdicts = serde_json::Map::new();
        verdicts.insert(
            "map-eig".into(),
            json!(map_verdict_str(self.map_detected)),
        );
        for l in 1..=self.hankel.max_order {
            verdicts.insert(
                format!("H{l}"),
                json!(verdict_str(self.hankel.verdict(l))),
            );
        }
        json!({
            "state": self.state_label,
            "map": self.map_label,
            "moments": self.moments.values(),
            "hankel_dets": self.hankel.determinants,
            "min_eig": self.min_eig,
            "verdicts": serde_json::Value::Object(verdicts),
        })
    }
}
