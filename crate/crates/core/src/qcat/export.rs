use serde_json::{json, Value};

use super::hermq::HermitianQ;
use crate::error::Result;
use crate::json::form_to_json;

/// Object labels with forms, hom-set sizes and the component partition.
pub fn q_to_json(q: &HermitianQ) -> Result<Value> {
    let objects = q
        .objects()
        .iter()
        .enumerate()
        .map(|(x, o)| Ok(json!({"index": x, "label": o.label, "form": form_to_json(&o.form)?})))
        .collect::<Result<Vec<_>>>()?;
    let homs: Vec<Value> =
        q.hom_sizes().map(|((x, y), n)| json!({"source": x, "target": y, "size": n})).collect();
    Ok(json!({
        "objects": objects,
        "arrows": q.arrow_count(),
        "homs": homs,
        "components": q.components(),
    }))
}

/// Quiver of nonempty hom-sets between distinct objects, one cluster per component.
pub fn q_to_dot(q: &HermitianQ) -> String {
    let mut out = String::from("digraph hermitian_q {\n  node [shape=box];\n");
    for (c, comp) in q.components().iter().enumerate() {
        out.push_str(&format!("  subgraph cluster_{c} {{\n    label=\"component {c}\";\n"));
        for &x in comp {
            out.push_str(&format!("    o{x} [label=\"{}\"];\n", q.objects()[x].label));
        }
        out.push_str("  }\n");
    }
    for ((x, y), n) in q.hom_sizes() {
        if x != y {
            out.push_str(&format!("  o{x} -> o{y} [label=\"{n}\"];\n"));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::RingSpec;
    use crate::formcore::FormParameter;
    use crate::qcat::build_hermitian_q;

    #[test]
    fn export_lists_every_object_and_component() {
        let param = FormParameter::symmetric(RingSpec::zmod(2).unwrap());
        let (q, _) = build_hermitian_q(&param, 2, 1).unwrap();
        let v = q_to_json(&q).unwrap();
        assert_eq!(v["objects"].as_array().unwrap().len(), q.objects().len());
        assert_eq!(v["components"].as_array().unwrap().len(), 2);
        let dot = q_to_dot(&q);
        assert_eq!(dot.matches("subgraph").count(), 2);
    }
}
