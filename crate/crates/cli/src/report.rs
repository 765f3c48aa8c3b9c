use std::fmt::{self, Display};

/// Ordered `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.push("command", command);
        r
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_num(value));
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    /// Free-form line without a key (used for tables).
    pub fn line(&mut self, text: impl Display) {
        self.lines.push((String::new(), text.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            if k.is_empty() {
                writeln!(f, "{v}")?;
            } else {
                writeln!(f, "{k}: {v}")?;
            }
        }
        Ok(())
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
