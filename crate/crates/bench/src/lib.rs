//! Workloads shared by the benchmarks.

use std::sync::Arc;

use gradcons::{CraFixtures, TypedGraph};

/// A CRA model with `classes` classes, `per_class` features in each, and a
/// dependency from every feature to the next one.
pub fn cra_model(fx: &CraFixtures, classes: usize, per_class: usize) -> Arc<TypedGraph> {
    let mut g = TypedGraph::new(fx.types.clone());
    let mut features = Vec::new();
    for c in 0..classes {
        let class = format!("C{c}");
        g.add_node(class.as_str(), "Class");
        for i in 0..per_class {
            let f = format!("f{c}_{i}");
            g.add_node(f.as_str(), "Feature");
            g.add_edge(format!("a_{f}"), "isAssigned", f.as_str(), class.as_str());
            features.push(f);
        }
    }
    for (k, pair) in features.windows(2).enumerate() {
        g.add_edge(format!("d{k}"), "dependsOn", pair[0].as_str(), pair[1].as_str());
    }
    Arc::new(g)
}
