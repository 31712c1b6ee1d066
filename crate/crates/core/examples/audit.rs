//! Structural audit of the prototype nonlinearity and of a parameter choice
//! outside the admissible range.

use satwave::model::{audit_prototype, AuditGrid, PrototypeParams};

fn main() {
    let grid = AuditGrid::default();
    for params in [PrototypeParams::default(), PrototypeParams::new(0.5, 1.6)] {
        println!("b = {}, alpha = {}", params.b, params.alpha);
        for r in audit_prototype(params, &grid).records {
            let mark = if r.passed { "ok  " } else { "FAIL" };
            println!("  {mark} {:6} {}", r.assumption, r.detail);
        }
    }
}
