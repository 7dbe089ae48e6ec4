//! Key/value template store with `{placeholder}` slots.

use std::collections::BTreeMap;
use std::path::Path;

use super::RealizeError;

const BUILTIN: &str = include_str!("../../templates/default.tpl");

/// Values available to a template while rendering.
pub type Slots = BTreeMap<&'static str, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    entries: BTreeMap<String, String>,
}

impl Default for Templates {
    fn default() -> Self {
        Templates::builtin()
    }
}

impl Templates {
    /// The shipped default wording.
    pub fn builtin() -> Templates {
        Templates::parse(BUILTIN).expect("built-in templates parse")
    }

    /// Parses a template file on its own.
    pub fn parse(text: &str) -> Result<Templates, RealizeError> {
        let mut entries = BTreeMap::new();
        let mut current: Option<(String, Vec<String>, usize)> = None;
        let finish = |cur: Option<(String, Vec<String>, usize)>,
                      entries: &mut BTreeMap<String, String>|
         -> Result<(), RealizeError> {
            if let Some((key, lines, line)) = cur {
                let body = lines.join(" ");
                if body.is_empty() {
                    return Err(RealizeError::TemplateSyntax {
                        line,
                        message: format!("template [{key}] is empty"),
                    });
                }
                check_placeholders(&body, line)?;
                if entries.insert(key.clone(), body).is_some() {
                    return Err(RealizeError::TemplateSyntax {
                        line,
                        message: format!("template [{key}] defined twice"),
                    });
                }
            }
            Ok(())
        };
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.starts_with('#') {
                continue;
            }
            if let Some(key) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                finish(current.take(), &mut entries)?;
                let key = key.trim();
                if key.is_empty() || key.contains(char::is_whitespace) {
                    return Err(RealizeError::TemplateSyntax {
                        line: line_no,
                        message: format!("bad template key {key:?}"),
                    });
                }
                current = Some((key.to_string(), Vec::new(), line_no));
            } else if line.is_empty() {
                continue;
            } else {
                match current.as_mut() {
                    Some((_, lines, _)) => lines.push(line.to_string()),
                    None => {
                        return Err(RealizeError::TemplateSyntax {
                            line: line_no,
                            message: "text before the first [key]".into(),
                        })
                    }
                }
            }
        }
        finish(current.take(), &mut entries)?;
        Ok(Templates { entries })
    }

    /// Built-in templates with the entries of `text` layered on top.
    pub fn with_overrides(text: &str) -> Result<Templates, RealizeError> {
        let mut base = Templates::builtin();
        base.entries.extend(Templates::parse(text)?.entries);
        Ok(base)
    }

    pub fn load_overrides(path: &Path) -> Result<Templates, RealizeError> {
        let text = std::fs::read_to_string(path).map_err(|e| RealizeError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Templates::with_overrides(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fills the template `key` from `slots`.
    pub fn render(&self, key: &str, slots: &Slots) -> Result<String, RealizeError> {
        let template = self
            .get(key)
            .ok_or_else(|| RealizeError::MissingTemplate(key.to_string()))?;
        let mut out = String::with_capacity(template.len() + 32);
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let close = rest[open..].find('}').expect("checked at parse time") + open;
            let spec = &rest[open + 1..close];
            let (name, filter) = match spec.split_once('|') {
                Some((n, f)) => (n.trim(), Some(f.trim())),
                None => (spec.trim(), None),
            };
            let value = slots.get(name).ok_or_else(|| RealizeError::MissingSlot {
                template: key.to_string(),
                slot: name.to_string(),
            })?;
            match filter {
                None => out.push_str(value),
                Some("lower") => out.push_str(&lower_words(value)),
                Some("capitalize") => out.push_str(&capitalize(value)),
                Some(other) => {
                    return Err(RealizeError::UnknownFilter(other.to_string()));
                }
            }
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

fn check_placeholders(body: &str, line: usize) -> Result<(), RealizeError> {
    let mut depth = 0usize;
    for c in body.chars() {
        match c {
            '{' if depth == 0 => depth = 1,
            '}' if depth == 1 => depth = 0,
            '{' | '}' => {
                return Err(RealizeError::TemplateSyntax {
                    line,
                    message: "unbalanced braces".into(),
                })
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(RealizeError::TemplateSyntax {
            line,
            message: "unclosed placeholder".into(),
        });
    }
    Ok(())
}

/// Lower-cases title-case words ("Low Income" -> "low income") and leaves
/// acronyms and mixed tokens ("AAPL", "COVID-19") alone.
pub fn lower_words(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) if first.is_uppercase() && chars.all(|c| !c.is_uppercase()) => {
                    w.to_lowercase()
                }
                _ => w.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slots(pairs: &[(&'static str, &str)]) -> Slots {
        pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
    }

    #[test]
    fn parses_blocks_and_joins_lines() {
        let t = Templates::parse("# c\n[a.b]\nHello\n  {who}.\n\n[c]\nx\n").unwrap();
        assert_eq!(t.get("a.b"), Some("Hello {who}."));
        assert_eq!(
            t.render("a.b", &slots(&[("who", "you")])).unwrap(),
            "Hello you."
        );
    }

    #[test]
    fn filters() {
        let t = Templates::parse("[k]\nFor {g|lower}, {s|capitalize}.").unwrap();
        let out = t
            .render(
                "k",
                &slots(&[("g", "Low Income Countries"), ("s", "the rate")]),
            )
            .unwrap();
        assert_eq!(out, "For low income countries, The rate.");
        assert_eq!(
            lower_words("AAPL and COVID-19 Cases"),
            "AAPL and COVID-19 cases"
        );
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            Templates::parse("stray\n[k]\nx"),
            Err(RealizeError::TemplateSyntax { line: 1, .. })
        ));
        assert!(matches!(
            Templates::parse("[k]\n"),
            Err(RealizeError::TemplateSyntax { .. })
        ));
        assert!(matches!(
            Templates::parse("[k]\n{open"),
            Err(RealizeError::TemplateSyntax { .. })
        ));
        assert!(matches!(
            Templates::parse("[k]\na\n[k]\nb"),
            Err(RealizeError::TemplateSyntax { .. })
        ));
    }

    #[test]
    fn render_errors() {
        let t = Templates::parse("[k]\n{missing} {x|shout}").unwrap();
        assert!(matches!(
            t.render("k", &Slots::new()),
            Err(RealizeError::MissingSlot { .. })
        ));
        assert!(matches!(
            t.render("nope", &Slots::new()),
            Err(RealizeError::MissingTemplate(_))
        ));
        assert!(matches!(
            t.render("k", &slots(&[("missing", "m"), ("x", "y")])),
            Err(RealizeError::UnknownFilter(f)) if f == "shout"
        ));
    }

    #[test]
    fn overrides_layer_on_builtin() {
        let t =
            Templates::with_overrides("[level1.chart_untitled]\nA {chart_type} appears.").unwrap();
        assert_eq!(
            t.get("level1.chart_untitled"),
            Some("A {chart_type} appears.")
        );
        assert!(t.get("extremum.natural").is_some());
    }
}
