use std::fmt::Write as _;
use std::str::FromStr;

use super::{ContactError, ContactGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    EdgeCsv,
}

impl FromStr for ExportFormat {
    type Err = ContactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "edge_csv" | "csv" => Ok(ExportFormat::EdgeCsv),
            other => Err(ContactError::UnknownFormat(other.to_owned())),
        }
    }
}

/// Node shape per department: squares, diamonds, ovals, hexagons for the rest.
pub fn department_shape(department: Option<&str>) -> &'static str {
    match department.map(str::to_ascii_lowercase).as_deref() {
        Some("research") => "square",
        Some("development") => "diamond",
        Some("workshops") | Some("workshop") => "oval",
        _ => "hexagon",
    }
}

/// Anonymized node label.
pub fn node_label(agent: crate::world::AgentId) -> String {
    format!("P{agent:02}")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph. Output depends only on the graph, byte for byte.
pub fn export_graph(graph: &ContactGraph, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::Dot => {
            out.push_str("digraph contacts {\n");
            for (&agent, dept) in &graph.nodes {
                let label = node_label(agent);
                let _ = writeln!(
                    out,
                    "  \"{label}\" [shape={}, department=\"{}\"];",
                    department_shape(dept.as_deref()),
                    escape(dept.as_deref().unwrap_or("other")),
                );
            }
            for (&(from, to), &w) in &graph.edges {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{w}\", weight={w}];", node_label(from), node_label(to));
            }
            out.push_str("}\n");
        }
        ExportFormat::EdgeCsv => {
            out.push_str("from,to,weight\n");
            for (&(from, to), &w) in &graph.edges {
                let _ = writeln!(out, "{from},{to},{w}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_edge() -> ContactGraph {
        let mut g = ContactGraph::default();
        g.nodes.insert(1, Some("Research".into()));
        g.nodes.insert(2, None);
        g.edges.insert((1, 2), 12);
        g
    }

    #[test]
    fn dot_has_directed_labelled_edge() {
        let dot = export_graph(&one_edge(), ExportFormat::Dot);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"P01\" -> \"P02\" [label=\"12\""), "{dot}");
    }

    #[test]
    fn research_nodes_are_squares() {
        let dot = export_graph(&one_edge(), ExportFormat::Dot);
        assert!(dot.contains("\"P01\" [shape=square"));
        assert!(dot.contains("\"P02\" [shape=hexagon"));
        assert_eq!(department_shape(Some("Development")), "diamond");
        assert_eq!(department_shape(Some("Workshops")), "oval");
    }

    #[test]
    fn exports_are_stable() {
        for f in [ExportFormat::Dot, ExportFormat::EdgeCsv] {
            assert_eq!(export_graph(&one_edge(), f), export_graph(&one_edge().clone(), f));
        }
        assert_eq!(export_graph(&one_edge(), ExportFormat::EdgeCsv), "from,to,weight\n1,2,12\n");
    }

    #[test]
    fn unknown_format() {
        assert_eq!("graphml".parse::<ExportFormat>(), Err(ContactError::UnknownFormat("graphml".into())));
    }
}
