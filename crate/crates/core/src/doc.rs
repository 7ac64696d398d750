//! Canonical document rendering shared by all serializers.

use serde_json::Value as Json;

/// Render a JSON document in its canonical textual form: two-space
/// indentation, key order as inserted, UTF-8, LF line endings, one
/// trailing newline.
pub fn to_canonical_string(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("in-memory JSON always serializes");
    s.push('\n');
    s
}
