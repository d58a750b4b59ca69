#![allow(dead_code)]

use hcp_core::benchmarks::KITCHEN_LITE_LOOKUP;
use hcp_core::lang::{self, ParsedUnit};
use hcp_core::{
    ConditionalPlan, Engine, EngineConfig, Feasibility, FeasibilityView, GroundModel, GroundProblem, LookupTable,
    RunReport,
};

pub struct Instance {
    pub unit: ParsedUnit,
    pub model: GroundModel,
    pub problem: GroundProblem,
    pub feas: Feasibility,
}

impl Instance {
    pub fn view(&self) -> FeasibilityView<'_> {
        FeasibilityView::new(&self.feas, &self.model)
    }

    pub fn run(&self, config: EngineConfig) -> (ConditionalPlan, RunReport) {
        let view = self.view();
        Engine::new(&self.model, &self.problem.goal, &view, config)
            .run(&self.problem.initial)
            .expect("instance is solvable")
    }
}

/// Parses, registers the grid (if any) and, when the domain asks for
/// table predicates, the kitchen-lite lookup table.
pub fn load(text: &str) -> Instance {
    load_with_table(text, KITCHEN_LITE_LOOKUP)
}

pub fn load_with_table(text: &str, table: &str) -> Instance {
    let unit = lang::parse(text);
    let errors: Vec<String> = unit.errors().map(|d| d.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    let mut feas = Feasibility::new();
    if let Some(g) = &unit.domain.grid {
        feas.register_grid(g).unwrap();
    }
    let wanted = unit.domain.feasibility_predicates();
    if wanted.iter().any(|p| !feas.is_registered(p)) {
        feas.register_table(&LookupTable::parse(table).unwrap()).unwrap();
    }
    let model = GroundModel::ground(&unit.domain).unwrap();
    let problem = model.ground_problem(&unit.problem).unwrap();
    Instance {
        unit,
        model,
        problem,
        feas,
    }
}
