use std::fmt::Write as _;

use super::ObservationTree;
use crate::mealy::{dot_quote, SymbolTable};

impl ObservationTree {
    /// Debug dump of the tree edges in the DOT subset used for machines.
    /// Basis and frontier nodes carry `class="basis"` / `class="frontier"`.
    pub fn to_dot(&self, inputs: &SymbolTable, outputs: &SymbolTable) -> String {
        let mut out = String::from("digraph tree {\n");
        let _ = writeln!(out, "    __start0 [label=\"\" shape=\"none\"];");
        for node in self.nodes() {
            let class = if self.is_basis(node) {
                " class=\"basis\""
            } else if self.is_frontier(node) {
                " class=\"frontier\""
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    {} [shape=\"circle\"{class}];",
                dot_quote(&node.to_string())
            );
        }
        let _ = writeln!(out, "    __start0 -> \"t0\";");
        for node in self.nodes() {
            for i in self.inputs() {
                if let Some((o, child)) = self.step(node, i) {
                    let label = format!("{}/{}", inputs.name(i.0), outputs.name(o.0));
                    let _ = writeln!(
                        out,
                        "    {} -> {} [label={}];",
                        dot_quote(&node.to_string()),
                        dot_quote(&child.to_string()),
                        dot_quote(&label)
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::fixtures::ads_example_tree;
    use crate::mealy::{parse_dot, SymbolTable};

    #[test]
    fn dump_parses_as_partial_machine() {
        let (tree, inputs) = ads_example_tree();
        let outputs = SymbolTable::from_names(["0", "1", "2"]);
        let text = tree.to_dot(&inputs, &outputs);
        assert!(text.contains("\"t4\" [shape=\"circle\" class=\"basis\"]"));
        assert!(text.contains("\"t5\" [shape=\"circle\" class=\"frontier\"]"));
        let m = parse_dot(&text).unwrap();
        assert_eq!(m.num_states(), tree.num_nodes());
        assert!(!m.is_complete());
    }
}
