//! Per-span realization of a task formula.
//!
//! The transcript is cut into spans, audio frames and tokens are shared out
//! over the spans in proportion to span byte length, and the formula is then
//! laid out once per span:
//!
//! ```text
//! a_c→t→a_d over spans s0 s1  =>  AC(s0) T(s0) AD(s0) AC(s1) T(s1) AD(s1)
//! ```
//!
//! Atoms that are not aligned with the transcript (a text prompt on the query
//! side of a text-answering task, a second paired `a_c`) are emitted once,
//! ahead of the spans.

use serde::{Deserialize, Serialize};

use crate::error::DatagenError;
use crate::pattern::{Atom, Pattern};
use crate::recipe::TaskRecipe;
use crate::sample::{InterleavedSample, Role, Scale, Segment};
use crate::segment::segment_transcript;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleInputs {
    #[serde(default)]
    pub transcript: Option<String>,
    #[serde(default)]
    pub ad_tokens: Option<Vec<u32>>,
    #[serde(default)]
    pub ac_frames: Option<u64>,
    /// Frames of a second audio input, for `a_c|a_c` queries.
    #[serde(default)]
    pub aux_ac_frames: Option<u64>,
    /// Instruction text for formulas with `t` on both sides.
    #[serde(default)]
    pub prompt: Option<String>,
}

/// Splits `total` over `weights` with largest-remainder rounding. Ties go to
/// the earlier index.
pub fn allocate_proportional(total: u64, weights: &[usize]) -> Result<Vec<u64>, DatagenError> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    if sum == 0 {
        return Err(DatagenError::AlignmentError(format!(
            "{total} units over spans of zero total length"
        )));
    }
    let t = total as u128;
    let mut out: Vec<u64> = weights.iter().map(|&w| (t * w as u128 / sum) as u64).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(t * weights[i] as u128 % sum), i));
    let short = total - out.iter().sum::<u64>();
    for &i in order.iter().take(short as usize) {
        out[i] += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Placement {
    Aligned(Atom),
    Prompt,
    AuxAudio,
}

fn placements(p: &Pattern) -> Vec<Vec<Placement>> {
    let text_answer = p.responses().any(|&a| a == Atom::T);
    p.sides
        .iter()
        .enumerate()
        .map(|(s, group)| {
            let mut seen_ac = false;
            group
                .iter()
                .map(|&a| match a {
                    Atom::T if s == 0 && text_answer => Placement::Prompt,
                    Atom::Ac if seen_ac => Placement::AuxAudio,
                    Atom::Ac => {
                        seen_ac = true;
                        Placement::Aligned(Atom::Ac)
                    }
                    other => Placement::Aligned(other),
                })
                .collect()
        })
        .collect()
}

fn role_of(side: usize) -> Role {
    if side == 0 {
        Role::Query
    } else {
        Role::Response
    }
}

fn realize(
    name: &str,
    pattern: &Pattern,
    inputs: &SampleInputs,
    scale: Scale,
) -> Result<InterleavedSample, DatagenError> {
    let missing = |m: &str| DatagenError::MissingModality {
        recipe: name.to_string(),
        modality: m.to_string(),
    };
    let plan = placements(pattern);
    let flat = || plan.iter().flatten();
    let aligned_t = flat().filter(|p| **p == Placement::Aligned(Atom::T)).count();
    if aligned_t > 1 {
        return Err(DatagenError::UnsupportedPattern(pattern.to_string()));
    }
    let needs = |p: Placement| flat().any(|x| *x == p);

    let transcript = inputs.transcript.as_deref().filter(|t| !t.is_empty());
    if aligned_t == 1 && transcript.is_none() {
        return Err(missing("t"));
    }
    let frames = match inputs.ac_frames {
        Some(n) if n > 0 => n,
        _ if needs(Placement::Aligned(Atom::Ac)) => return Err(missing("a_c")),
        _ => 0,
    };
    let tokens: &[u32] = match inputs.ad_tokens.as_deref() {
        Some(t) if !t.is_empty() => t,
        _ if needs(Placement::Aligned(Atom::Ad)) => return Err(missing("a_d")),
        _ => &[],
    };

    // spans, or a single text-free unit for audio-only formulas
    let spans: Vec<Option<(usize, usize)>> = match transcript {
        Some(t) => segment_transcript(t, scale)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let weights: Vec<usize> = spans.iter().map(|s| s.map_or(1, |(a, b)| b - a)).collect();
    let share = |total: u64, what: &str| -> Result<Vec<u64>, DatagenError> {
        let alloc = allocate_proportional(total, &weights)?;
        if let Some(i) = alloc.iter().position(|&n| n == 0) {
            return Err(DatagenError::AlignmentError(format!(
                "span {i} receives no {what} ({total} over {} spans)",
                spans.len()
            )));
        }
        Ok(alloc)
    };
    let frame_alloc = if needs(Placement::Aligned(Atom::Ac)) { share(frames, "a_c frames")? } else { Vec::new() };
    let token_alloc = if needs(Placement::Aligned(Atom::Ad)) { share(tokens.len() as u64, "a_d tokens")? } else { Vec::new() };

    let mut segs = Vec::new();
    for (side, group) in plan.iter().enumerate() {
        for p in group {
            match p {
                Placement::Prompt => {
                    let prompt = inputs.prompt.as_deref().ok_or_else(|| missing("t prompt"))?;
                    segs.push(Segment::text(role_of(side), prompt));
                }
                Placement::AuxAudio => {
                    let n = inputs.aux_ac_frames.filter(|&n| n > 0).ok_or_else(|| missing("second a_c"))?;
                    segs.push(Segment::ac(role_of(side), n));
                }
                Placement::Aligned(_) => {}
            }
        }
    }

    let mut unit = 0u32;
    let mut token_cursor = 0usize;
    for (k, span) in spans.iter().enumerate() {
        let token_range = if token_alloc.is_empty() {
            0..0
        } else {
            let r = token_cursor..token_cursor + token_alloc[k] as usize;
            token_cursor = r.end;
            r
        };
        for (side, group) in plan.iter().enumerate() {
            let aligned: Vec<Atom> = group
                .iter()
                .filter_map(|p| match p {
                    Placement::Aligned(a) => Some(*a),
                    _ => None,
                })
                .collect();
            let paired = aligned.len() > 1;
            for atom in aligned {
                let mut seg = match atom {
                    Atom::Ac => Segment::ac(role_of(side), frame_alloc[k]),
                    Atom::Ad => Segment::ad(role_of(side), tokens[token_range.clone()].to_vec()),
                    Atom::T => {
                        let (a, b) = span.expect("aligned text implies a transcript");
                        Segment::text(role_of(side), &transcript.unwrap_or_default()[a..b])
                    }
                };
                seg.span = *span;
                if paired {
                    seg.unit = Some(unit);
                }
                segs.push(seg);
            }
            if paired {
                unit += 1;
            }
        }
    }
    Ok(InterleavedSample::with_default_mask(segs, name, scale))
}

/// Lays `pattern` out over the transcript spans at `scale`.
pub fn build_interleaved(
    transcript: &str,
    ad_tokens: &[u32],
    ac_frames: u64,
    pattern: &Pattern,
    scale: Scale,
) -> Result<InterleavedSample, DatagenError> {
    if transcript.is_empty() {
        return Err(DatagenError::EmptyText);
    }
    let inputs = SampleInputs {
        transcript: Some(transcript.to_string()),
        ad_tokens: Some(ad_tokens.to_vec()),
        ac_frames: Some(ac_frames),
        ..SampleInputs::default()
    };
    realize(&pattern.to_string(), pattern, &inputs, scale)
}

/// Realizes `recipe` from whatever modalities `inputs` provide.
pub fn apply_recipe(
    recipe: &TaskRecipe,
    inputs: &SampleInputs,
    scale: Scale,
) -> Result<InterleavedSample, DatagenError> {
    realize(&recipe.name, &recipe.pattern, inputs, scale)
}
