use serde::Serialize;

use linsets::families::FamilyReport;

/// A finished command: the human table and one JSON object per record.
pub struct Output {
    command: &'static str,
    pub table: String,
    records: Vec<String>,
    pub pass: bool,
}

impl Output {
    pub fn new(command: &'static str) -> Self {
        Output { command, table: String::new(), records: Vec::new(), pass: true }
    }

    /// Field order follows the struct, with `command` prepended.
    pub fn record<T: Serialize>(&mut self, value: &T) {
        let body = serde_json::to_string(value).expect("records serialize");
        let rest = body.strip_prefix('{').expect("records are objects");
        let sep = if rest == "}" { "" } else { "," };
        self.records.push(format!("{{\"command\":\"{}\"{sep}{rest}", self.command));
    }

    pub fn json_lines(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn family_table(rep: &FamilyReport) -> String {
    let mut s = format!(
        "{} over q={} t={} (xi = {}), rank {}\nenumerator  {} (size {})\nidentity    {}\n",
        rep.family, rep.q, rep.t, rep.xi, rep.rank, rep.enumerator, rep.size, rep.identity
    );
    for r in &rep.regions {
        let realized: Vec<String> = r.realized.iter().map(|(w, c)| format!("{w}:{c}")).collect();
        s.push_str(&format!(
            "  {:<22} weights {:<24} rules [{}]  {}\n",
            r.region.to_string(),
            realized.join(" "),
            r.rules.join(", "),
            if r.violations == 0 { "ok".to_string() } else { format!("{} violations", r.violations) }
        ));
        if let Some(v) = &r.first_violation {
            s.push_str(&format!("    first: {v}\n"));
        }
    }
    for n in &rep.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s.push_str(verdict(rep.pass));
    s.push('\n');
    s
}
