//! Structured residual reports with deterministic serialization: fixed field
//! order, sorted keys and 17-significant-digit floats, so identical
//! invocations produce byte-identical output.

/// One named check: an identity or condition, its worst residual over the
/// sampled set, and the threshold it was held against.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub id: String,
    /// Which operator identity or condition the check exercises.
    pub anchor: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
}

impl CheckEntry {
    pub fn new(
        id: &str,
        anchor: &str,
        max_residual: f64,
        threshold: f64,
        samples: usize,
        seed: u64,
    ) -> CheckEntry {
        CheckEntry {
            id: id.to_string(),
            anchor: anchor.to_string(),
            max_residual,
            threshold,
            passed: max_residual <= threshold,
            samples,
            seed,
        }
    }
}

/// A full suite run against one model.
#[derive(Clone, Debug)]
pub struct Report {
    pub schema: u32,
    pub model: String,
    pub suite: String,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new(model: &str, suite: &str, points: usize, seed: u64, tol: f64) -> Report {
        Report {
            schema: 1,
            model: model.to_string(),
            suite: suite.to_string(),
            points,
            seed,
            tol,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn overall_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    /// Deterministic JSON: keys in a fixed sorted order, floats with 17
    /// significant digits.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        s.push_str("  \"entries\": [\n");
        for (i, e) in self.entries.iter().enumerate() {
            s.push_str("    {");
            s.push_str(&format!("\"anchor\": {}, ", json_str(&e.anchor)));
            s.push_str(&format!("\"id\": {}, ", json_str(&e.id)));
            s.push_str(&format!("\"max_residual\": {}, ", fmt_f64(e.max_residual)));
            s.push_str(&format!("\"samples\": {}, ", e.samples));
            s.push_str(&format!("\"seed\": {}, ", e.seed));
            s.push_str(&format!("\"threshold\": {}, ", fmt_f64(e.threshold)));
            s.push_str(&format!(
                "\"verdict\": \"{}\"",
                if e.passed { "pass" } else { "fail" }
            ));
            s.push_str(if i + 1 < self.entries.len() { "},\n" } else { "}\n" });
        }
        s.push_str("  ],\n");
        s.push_str(&format!("  \"model\": {},\n", json_str(&self.model)));
        s.push_str(&format!(
            "  \"overall\": \"{}\",\n",
            if self.overall_pass() { "pass" } else { "fail" }
        ));
        s.push_str(&format!("  \"points\": {},\n", self.points));
        s.push_str(&format!("  \"schema\": {},\n", self.schema));
        s.push_str(&format!("  \"seed\": {},\n", self.seed));
        s.push_str(&format!("  \"suite\": {},\n", json_str(&self.suite)));
        s.push_str(&format!("  \"tol\": {}\n", fmt_f64(self.tol)));
        s.push_str("}\n");
        s
    }

    /// Human-readable table: one line per check.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "suite {} on {} (points {}, seed {}, tol {:.3e})\n",
            self.suite, self.model, self.points, self.seed, self.tol
        ));
        let wid = self
            .entries
            .iter()
            .map(|e| e.id.len())
            .max()
            .unwrap_or(8)
            .max(8);
        for e in &self.entries {
            s.push_str(&format!(
                "  {} {:wid$}  residual {:.6e}  (<= {:.3e})  {}\n",
                if e.passed { "PASS" } else { "FAIL" },
                e.id,
                e.max_residual,
                e.threshold,
                e.anchor,
                wid = wid
            ));
        }
        s.push_str(&format!(
            "overall: {}\n",
            if self.overall_pass() { "PASS" } else { "FAIL" }
        ));
        s
    }
}

/// 17 significant digits, sign-stable; round-trips through a f64 parser.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0.0".to_string();
    }
    format!("{v:.16e}")
}

fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_deterministic_and_ordered() {
        let mut r = Report::new("m", "s", 10, 42, 1e-8);
        r.push(CheckEntry::new("a-check", "identity", 1.25e-12, 1e-8, 10, 42));
        r.push(CheckEntry::new("b-check", "other", 2.0, 1e-8, 10, 43));
        let j1 = r.to_json();
        let j2 = r.to_json();
        assert_eq!(j1, j2);
        assert!(j1.contains("\"verdict\": \"pass\""));
        assert!(j1.contains("\"verdict\": \"fail\""));
        assert!(j1.contains("\"overall\": \"fail\""));
        // 17 significant digits; the printed value re-parses exactly
        let printed = fmt_f64(1.25e-12);
        assert_eq!(printed.parse::<f64>().unwrap(), 1.25e-12);
        assert!(j1.contains(&printed));
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(0.0), "0.0");
        let reparsed: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(reparsed, std::f64::consts::PI);
    }
}
