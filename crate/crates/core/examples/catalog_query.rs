//! Queries the bundled dielectric-loss catalog.

use resonator_loss::io::{catalog_query, CatalogFilter};

fn main() {
    let filters = [
        ("epitaxial alumina", CatalogFilter {
            material: Some("Al2O3".into()),
            crystallinity: Some("epitaxial".into()),
            ..CatalogFilter::default()
        }),
        ("δ_LP below 1e-5", CatalogFilter {
            max_delta_lp: Some(1e-5),
            ..CatalogFilter::default()
        }),
    ];
    for (name, filter) in filters {
        println!("{name}:");
        for e in catalog_query(&filter) {
            let lp = e.delta_lp.as_ref().map_or("-".to_string(), |c| c.value.to_string());
            println!("  {:<12} {:<10} {:<12} δ_LP {lp} ×1e-5", e.material, e.reference, e.geometry);
        }
    }
}
