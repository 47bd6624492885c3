use std::fmt::Write;

use super::classifier::DecisionTree;
use super::tree::TreeNode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Dot,
}

pub fn export_tree(tree: &DecisionTree, format: ExportFormat) -> String {
    match format {
        ExportFormat::Text => {
            let mut out = String::new();
            text_node(tree, &tree.root, 0, &mut out);
            out
        }
        ExportFormat::Dot => {
            let mut out = String::from(
                "digraph tree {\n  node [shape=box, style=\"filled\", fontname=\"helvetica\"];\n",
            );
            let mut next = 0;
            dot_node(tree, &tree.root, &mut next, &mut out);
            out.push_str("}\n");
            out
        }
    }
}

fn leaf_summary(value: &[f64]) -> (&'static str, f64) {
    let total = value[0] + value[1];
    let solvable = value[1] > value[0];
    let share = if solvable { value[1] } else { value[0] };
    let label = if solvable { "solvable" } else { "not solvable" };
    (label, if total > 0.0 { share / total } else { 0.0 })
}

fn text_node(tree: &DecisionTree, node: &TreeNode, depth: usize, out: &mut String) {
    let indent = "|   ".repeat(depth);
    match node {
        TreeNode::Split {
            feature,
            threshold,
            impurity,
            samples,
            weighted_samples,
            left,
            right,
        } => {
            let name = &tree.feature_names[*feature];
            let _ = writeln!(
                out,
                "{indent}|--- {name} <= {threshold:.6} (gini {impurity:.4}, samples {samples}, weight {weighted_samples:.3})"
            );
            text_node(tree, left, depth + 1, out);
            let _ = writeln!(out, "{indent}|--- {name} >  {threshold:.6}");
            text_node(tree, right, depth + 1, out);
        }
        TreeNode::Leaf { value, samples, .. } => {
            let (label, conf) = leaf_summary(value);
            let _ = writeln!(
                out,
                "{indent}|--- class: {label} (confidence {conf:.3}, samples {samples})"
            );
        }
    }
}

fn dot_node(tree: &DecisionTree, node: &TreeNode, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    match node {
        TreeNode::Split {
            feature,
            threshold,
            impurity,
            samples,
            left,
            right,
            ..
        } => {
            let _ = writeln!(
                out,
                "  {id} [label=\"{} <= {threshold:.6}\\ngini = {impurity:.4}\\nsamples = {samples}\", fillcolor=\"#9ecae1\"];",
                tree.feature_names[*feature]
            );
            let l = dot_node(tree, left, next, out);
            let _ = writeln!(out, "  {id} -> {l} [label=\"true\"];");
            let r = dot_node(tree, right, next, out);
            let _ = writeln!(out, "  {id} -> {r} [label=\"false\"];");
        }
        TreeNode::Leaf {
            value,
            impurity,
            samples,
            ..
        } => {
            let (label, conf) = leaf_summary(value);
            let colour = if value[1] > value[0] {
                "#a1d99b"
            } else {
                "#fc9272"
            };
            let _ = writeln!(
                out,
                "  {id} [label=\"{label}\\nconfidence = {conf:.3}\\ngini = {impurity:.4}\\nsamples = {samples}\", fillcolor=\"{colour}\"];"
            );
        }
    }
    id
}
