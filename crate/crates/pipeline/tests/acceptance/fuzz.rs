//! Parser robustness: a million adversarial inputs (random text, mutated
//! plans, pristine plans) must never panic, must always yield either a plan
//! or well-formed diagnostics, and every valid plan must survive a
//! pretty-print/parse round trip with its command list intact.

use std::panic::{catch_unwind, AssertUnwindSafe};

use benchtop_core::dsl;
use benchtop_core::model::{Command, Plan, Pose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOUP_INPUTS: u64 = 400_000;
const MUTATED_INPUTS: u64 = 300_000;
const PRISTINE_INPUTS: u64 = 300_000;

pub fn c7_parser_robustness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut accepted = 0u64;
    let mut rejected = 0u64;

    for _ in 0..SOUP_INPUTS {
        let text = if rng.gen_bool(0.5) {
            random_soup(&mut rng)
        } else {
            fragment_soup(&mut rng)
        };
        match checked_parse(&text)? {
            Ok(plan) => {
                accepted += 1;
                round_trip(&plan)?;
            }
            Err(diags) => {
                rejected += 1;
                check_diagnostics(&text, &diags)?;
            }
        }
    }

    for _ in 0..MUTATED_INPUTS {
        let plan = random_plan(&mut rng);
        let text = mutate(&dsl::pretty_print(&plan), &mut rng);
        match checked_parse(&text)? {
            Ok(plan) => {
                accepted += 1;
                round_trip(&plan)?;
            }
            Err(diags) => {
                rejected += 1;
                check_diagnostics(&text, &diags)?;
            }
        }
    }

    for _ in 0..PRISTINE_INPUTS {
        let plan = random_plan(&mut rng);
        let text = dsl::pretty_print(&plan);
        match checked_parse(&text)? {
            Ok(reparsed) => {
                accepted += 1;
                if reparsed.commands != plan.commands {
                    return Err(format!(
                        "round trip changed a pristine plan: {:?}",
                        snippet(&text)
                    ));
                }
            }
            Err(diags) => {
                return Err(format!(
                    "pristine plan rejected: {} in {:?}",
                    diags.first().map(|d| d.message.as_str()).unwrap_or("?"),
                    snippet(&text)
                ));
            }
        }
    }

    let total = SOUP_INPUTS + MUTATED_INPUTS + PRISTINE_INPUTS;
    Ok(format!(
        "{total} inputs, zero panics; {accepted} parsed (all round-trip clean), {rejected} rejected with well-formed diagnostics"
    ))
}

fn checked_parse(text: &str) -> Result<Result<Plan, Vec<dsl::ParseDiagnostic>>, String> {
    catch_unwind(AssertUnwindSafe(|| dsl::parse(text)))
        .map_err(|_| format!("parser panicked on {:?}", snippet(text)))
}

fn round_trip(plan: &Plan) -> Result<(), String> {
    let canonical = dsl::pretty_print(plan);
    match checked_parse(&canonical)? {
        Ok(reparsed) if reparsed.commands == plan.commands => Ok(()),
        Ok(_) => Err(format!(
            "canonical form reparsed to different commands: {:?}",
            snippet(&canonical)
        )),
        Err(diags) => Err(format!(
            "canonical form rejected: {} in {:?}",
            diags.first().map(|d| d.message.as_str()).unwrap_or("?"),
            snippet(&canonical)
        )),
    }
}

fn check_diagnostics(text: &str, diags: &[dsl::ParseDiagnostic]) -> Result<(), String> {
    if diags.is_empty() {
        return Err(format!("rejection without diagnostics for {:?}", snippet(text)));
    }
    for diag in diags {
        if diag.line == 0 || diag.column == 0 || diag.message.is_empty() {
            return Err(format!(
                "malformed diagnostic {}:{} {:?} for input {:?}",
                diag.line,
                diag.column,
                diag.message,
                snippet(text)
            ));
        }
    }
    Ok(())
}

fn snippet(text: &str) -> String {
    text.chars().take(80).collect()
}

fn random_plan(rng: &mut ChaCha8Rng) -> Plan {
    let len = if rng.gen_bool(0.01) {
        rng.gen_range(0..=100)
    } else {
        rng.gen_range(0..=6)
    };
    let commands = (0..len)
        .map(|_| match rng.gen_range(0..4u8) {
            0 => Command::OpenGripper,
            1 => Command::CloseGripper,
            _ => Command::MoveGripper(
                Pose::new(
                    random_coord(rng),
                    random_coord(rng),
                    random_coord(rng),
                    rng.gen_range(-10.0..10.0),
                )
                .expect("finite pose"),
            ),
        })
        .collect();
    Plan::new(commands, "").expect("within command cap")
}

fn random_coord(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..6u8) {
        0 => rng.gen_range(-0.5..0.5),
        1 => rng.gen_range(-500.0..500.0),
        2 => {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * 10f64.powi(rng.gen_range(-12..13))
        }
        3 => 0.0,
        4 => -0.0,
        _ => *[
            f64::MIN_POSITIVE,
            1e-300,
            12345.678901,
            0.1 + 0.2,
            -273.149999,
        ]
        .get(rng.gen_range(0..5usize))
        .unwrap(),
    }
}

fn random_soup(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(0..80usize);
    (0..len)
        .map(|_| match rng.gen_range(0..10u8) {
            0..=5 => char::from(rng.gen_range(0x20u8..0x7f)),
            6 => *['(', ')', ',', '.', '-', '_', '#'].get(rng.gen_range(0..7usize)).unwrap(),
            7 => char::from(rng.gen_range(0u8..0x20)),
            8 => '\n',
            _ => char::from_u32(rng.gen_range(0x80u32..0x1_0000))
                .unwrap_or('\u{fffd}'),
        })
        .collect()
}

fn fragment_soup(rng: &mut ChaCha8Rng) -> String {
    const FRAGMENTS: [&str; 18] = [
        "move_gripper",
        "open_gripper",
        "close_gripper",
        "move_gripper(",
        "(",
        ")",
        ",",
        "0.123456",
        "-1e9",
        "nan",
        "inf",
        " ",
        "\n",
        "\t",
        "# comment",
        "```",
        "0x41",
        "1_000",
    ];
    let pieces = rng.gen_range(0..24usize);
    let mut out = String::new();
    for _ in 0..pieces {
        out.push_str(FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]);
    }
    out
}

fn mutate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..=4usize) {
        if chars.is_empty() {
            chars.push(char::from(rng.gen_range(0x20u8..0x7f)));
            continue;
        }
        let at = rng.gen_range(0..chars.len());
        match rng.gen_range(0..4u8) {
            0 => {
                chars.remove(at);
            }
            1 => chars.insert(at, char::from(rng.gen_range(0x20u8..0x7f))),
            2 => chars[at] = char::from(rng.gen_range(0x20u8..0x7f)),
            _ => {
                let upto = rng.gen_range(at..chars.len());
                let copy: Vec<char> = chars[at..=upto.min(at + 12)].to_vec();
                for (offset, c) in copy.into_iter().enumerate() {
                    chars.insert(at + offset, c);
                }
            }
        }
    }
    chars.into_iter().collect()
}
