//! Line-oriented terminal conversation.
//!
//! Menus are numbered from 1. At a confirmation prompt `y`/`n` answer it; in
//! a suggestion list `0` or `none` means none of the above; in the FAQ menus
//! `b` or `back` goes back. `quit` ends the conversation and any other line
//! is a new question.

use std::io::{self, BufRead, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use clarify_core::{ActionKind, BotAction, Engine, Session, Stage, UserReply};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Quit,
    Skip,
    Reply(UserReply),
}

/// Interprets one line typed while the session is in `stage`.
pub fn parse_input(stage: Stage, line: &str) -> Input {
    let trimmed = line.trim();
    let lower = trimmed.to_lowercase();
    if trimmed.is_empty() {
        return Input::Skip;
    }
    if matches!(lower.as_str(), "quit" | "exit" | ":q") {
        return Input::Quit;
    }
    let number = trimmed.parse::<usize>().ok();
    let reply = match stage {
        Stage::AwaitingConfirmation => match lower.as_str() {
            "y" | "yes" => Some(UserReply::Confirm { yes: true }),
            "n" | "no" => Some(UserReply::Confirm { yes: false }),
            _ => None,
        },
        Stage::AwaitingSuggestionChoice => match (number, lower.as_str()) {
            (Some(0), _) | (_, "none") => Some(UserReply::NoneOfTheAbove),
            (Some(n), _) => Some(UserReply::Choose { index: n - 1 }),
            _ => None,
        },
        Stage::FaqTopics | Stage::FaqIntents => match (number, lower.as_str()) {
            (_, "b" | "back") => Some(UserReply::Back),
            (Some(n), _) if n > 0 && stage == Stage::FaqTopics => Some(UserReply::FaqTopic { index: n - 1 }),
            (Some(n), _) if n > 0 => Some(UserReply::FaqIntent { index: n - 1 }),
            _ => None,
        },
        Stage::Idle => None,
    };
    Input::Reply(reply.unwrap_or_else(|| UserReply::text(trimmed)))
}

pub fn render_action(action: &BotAction, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "bot> {}", action.text)?;
    match action.kind {
        ActionKind::ConfirmPrompt => writeln!(out, "     [y/n]")?,
        ActionKind::SuggestionList | ActionKind::FaqTopicList | ActionKind::FaqIntentList => {
            for (i, option) in action.options.iter().enumerate() {
                writeln!(out, "     {}. {option}", i + 1)?;
            }
            match action.kind {
                ActionKind::SuggestionList => writeln!(out, "     0. None of the above")?,
                ActionKind::FaqIntentList => writeln!(out, "     b. Back")?,
                _ => {}
            }
        }
        _ => {}
    }
    Ok(())
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Runs a conversation until `quit` or end of input and returns the session.
pub fn run_chat(engine: &Engine, input: impl BufRead, mut out: impl Write) -> io::Result<Session> {
    let mut session = Session::new("terminal");
    writeln!(out, "bot> Hello! Ask me a question, or type quit to leave.")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        match parse_input(session.stage(), &line) {
            Input::Quit => break,
            Input::Skip => continue,
            Input::Reply(reply) => match engine.handle(&mut session, reply, now_millis()) {
                Ok(action) => render_action(&action, &mut out)?,
                Err(err) => writeln!(out, "bot> {err}")?,
            },
        }
        out.flush()?;
    }
    writeln!(out, "bot> Goodbye.")?;
    out.flush()?;
    Ok(session)
}
