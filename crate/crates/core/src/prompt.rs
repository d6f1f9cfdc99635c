//! Prompt construction: a template with four placeholders plus a canonical
//! flat-text rendering of the scene.

use crate::model::EnvState;
use crate::tasks::TaskInstance;
use thiserror::Error;

/// Placeholders a template must contain exactly once each.
pub const PLACEHOLDERS: [&str; 4] = ["{{TASK}}", "{{EE_POSITION}}", "{{EE_ORIENTATION}}", "{{STATE}}"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template is missing placeholder {0}")]
    Missing(&'static str),
    #[error("template contains placeholder {0} {1} times, expected once")]
    Repeated(&'static str, usize),
}

/// Validated prompt template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self, TemplateError> {
        let text = text.into();
        for marker in PLACEHOLDERS {
            match text.matches(marker).count() {
                0 => return Err(TemplateError::Missing(marker)),
                1 => {}
                n => return Err(TemplateError::Repeated(marker, n)),
            }
        }
        Ok(Self { text })
    }

    /// The built-in template shipped with the crate.
    pub fn builtin() -> Self {
        Self::new(include_str!("prompt/default_prompt.txt")).expect("builtin template is well formed")
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// One line per object, id-sorted so the rendering is independent of
/// internal list order: `name: center=(x, y, z), yaw=r, size=(l, w, h)`.
pub fn serialize_state(state: &EnvState) -> String {
    let mut order: Vec<usize> = (0..state.objects.len()).collect();
    order.sort_by(|&a, &b| state.objects[a].id.cmp(&state.objects[b].id));
    let lines: Vec<String> = order
        .into_iter()
        .map(|i| {
            let o = &state.objects[i];
            format!(
                "{}: center=({:.4}, {:.4}, {:.4}), yaw={:.4}, size=({:.4}, {:.4}, {:.4})",
                o.name, o.center.x, o.center.y, o.center.z, o.center.yaw, o.length, o.width, o.height
            )
        })
        .collect();
    lines.join("\n")
}

/// Fill the template from the instance description and an explicitly chosen
/// scene (the ground truth, or a perception estimate of it).
pub fn build_prompt_with_state(template: &PromptTemplate, instance: &TaskInstance, state: &EnvState) -> String {
    let g = &state.gripper_pose;
    template
        .text
        .replacen("{{TASK}}", &instance.description, 1)
        .replacen("{{EE_POSITION}}", &format!("({:.4}, {:.4}, {:.4})", g.x, g.y, g.z), 1)
        .replacen("{{EE_ORIENTATION}}", &format!("{:.4}", g.yaw), 1)
        .replacen("{{STATE}}", &serialize_state(state), 1)
}

/// Fill the template from the instance's own ground-truth scene.
pub fn build_prompt(template: &PromptTemplate, instance: &TaskInstance) -> String {
    build_prompt_with_state(template, instance, &instance.initial_state)
}
