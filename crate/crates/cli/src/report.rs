//! Machine-readable run reports with a human table rendering.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Finding,
}

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub status: Status,
}

/// One invocation's result. The structured rendering is byte-stable for
/// fixed command, parameters and seed; wall time is table-only.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub items: Vec<Item>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: "1",
            command: command.to_string(),
            parameters: BTreeMap::new(),
            items: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        expected: impl ToString,
        computed: impl ToString,
        status: Status,
    ) {
        self.items.push(Item {
            name: name.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            status,
        });
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        expected: impl ToString,
        computed: impl ToString,
        ok: bool,
    ) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(name, expected, computed, status);
    }

    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut item in other.items {
            item.name = format!("{prefix}: {}", item.name);
            self.items.push(item);
        }
    }

    pub fn any_fail(&self) -> bool {
        self.items.iter().any(|i| i.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.command));
        if !self.parameters.is_empty() {
            let params: Vec<String> = self
                .parameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            out.push_str(&format!("parameters: {}\n", params.join(" ")));
        }
        let name_w = self
            .items
            .iter()
            .map(|i| i.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let exp_w = self
            .items
            .iter()
            .map(|i| i.expected.len())
            .max()
            .unwrap_or(8)
            .clamp(8, 44);
        out.push_str(&format!(
            "{:<12} {:<name_w$}  {:<exp_w$}  {}\n",
            "STATUS", "NAME", "EXPECTED", "COMPUTED"
        ));
        for item in &self.items {
            let status = match item.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inconclusive => "inconclusive",
                Status::Finding => "finding",
            };
            out.push_str(&format!(
                "{:<12} {:<name_w$}  {:<exp_w$}  {}\n",
                status, item.name, item.expected, item.computed
            ));
        }
        let fails = self.items.iter().filter(|i| i.status == Status::Fail).count();
        let findings = self
            .items
            .iter()
            .filter(|i| i.status == Status::Finding)
            .count();
        out.push_str(&format!(
            "summary: {} items, {} failed, {} findings",
            self.items.len(),
            fails,
            findings
        ));
        if let Some(ms) = self.wall_time_ms {
            out.push_str(&format!(" ({ms} ms)"));
        }
        out.push('\n');
        out
    }
}
