use std::sync::LazyLock;

use regex::{Captures, Regex};

static ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(amp|lt|gt|quot|apos|#[0-9]{1,7}|#[xX][0-9a-fA-F]{1,6});").unwrap());
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z!][^<>]*>").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"https?://\S+").unwrap());

fn unescape(caps: &Captures) -> String {
    let body = &caps[1];
    let decoded = match body {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        _ => {
            let num = &body[1..];
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok(),
                None => num.parse::<u32>().ok(),
            };
            code.and_then(char::from_u32)
        }
    };
    decoded.map_or_else(|| caps[0].to_string(), String::from)
}

/// Normalizes scraped post text: unescapes HTML entities, strips tags and
/// http(s) URLs, then collapses whitespace.
pub fn clean_text(raw: &str) -> String {
    let text = ENTITY.replace_all(raw, unescape);
    let text = TAG.replace_all(&text, " ");
    let text = URL.replace_all(&text, " ");
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
