/** Chat view state and its pure transitions.
 *
 * The message list mirrors the server transcript exactly: a question and
 * its answer are appended only once the server has answered, so a failed
 * send leaves the thread untouched (with a retry affordance instead).
 * The evidence panel always reflects the most recent answer.
 */

import type { AnswerPayload, EvidenceCard, Transcript } from "./api.js";

export interface Message {
  role: "patient" | "doctor";
  text: string;
  usedBrain?: boolean;
}

export interface ChatViewState {
  sessionId: string | null;
  messages: Message[];
  evidence: EvidenceCard[];
  keywords: string[];
  brainEnabled: boolean;
  disclaimer: string;
  pending: boolean;
  errorBanner: string | null;
  retryQuestion: string | null;
}

export function initialState(brainEnabled: boolean): ChatViewState {
  return {
    sessionId: null,
    messages: [],
    evidence: [],
    keywords: [],
    brainEnabled,
    disclaimer: "",
    pending: false,
    errorBanner: null,
    retryQuestion: null,
  };
}

export function beginSend(state: ChatViewState): ChatViewState {
  return { ...state, pending: true, errorBanner: null, retryQuestion: null };
}

/** A successful answer appends both sides of the turn and replaces the
 * evidence panel with the new answer's evidence, verbatim. */
export function applyAnswer(
  state: ChatViewState,
  question: string,
  payload: AnswerPayload,
): ChatViewState {
  return {
    ...state,
    messages: [
      ...state.messages,
      { role: "patient", text: question },
      { role: "doctor", text: payload.answer, usedBrain: payload.used_brain },
    ],
    evidence: payload.evidence,
    keywords: payload.keywords,
    disclaimer: payload.disclaimer,
    pending: false,
    errorBanner: null,
    retryQuestion: null,
  };
}

/** Transport failure: nothing reached the server, so the thread stays as
 * it was and the question becomes retryable. */
export function applyTransportFailure(
  state: ChatViewState,
  question: string,
): ChatViewState {
  return {
    ...state,
    pending: false,
    retryQuestion: question,
    errorBanner: null,
  };
}

/** Server rejected the request: surface its message in a banner. */
export function applyServerError(
  state: ChatViewState,
  detail: string,
): ChatViewState {
  return { ...state, pending: false, errorBanner: detail, retryQuestion: null };
}

export function setBrainEnabled(
  state: ChatViewState,
  enabled: boolean,
): ChatViewState {
  return { ...state, brainEnabled: enabled };
}

/** Rebuild the thread from a server transcript (page reload with a live
 * session); the last turn's evidence fills the panel. */
export function fromTranscript(
  state: ChatViewState,
  transcript: Transcript,
): ChatViewState {
  const messages: Message[] = [];
  for (const turn of transcript.turns) {
    messages.push({ role: "patient", text: turn.question });
    messages.push({
      role: "doctor",
      text: turn.answer.answer,
      usedBrain: turn.answer.used_brain,
    });
  }
  const last = transcript.turns[transcript.turns.length - 1];
  return {
    ...state,
    sessionId: transcript.session_id,
    messages,
    evidence: last ? last.answer.evidence : [],
    keywords: last ? last.answer.keywords : [],
    disclaimer: last ? last.answer.disclaimer : state.disclaimer,
  };
}

const BRAIN_KEY = "medbrain.use_brain";
const SESSION_KEY = "medbrain.session_id";

export function loadBrainToggle(storage: Storage): boolean {
  return storage.getItem(BRAIN_KEY) !== "false";
}

export function saveBrainToggle(storage: Storage, enabled: boolean): void {
  storage.setItem(BRAIN_KEY, String(enabled));
}

export function loadSessionId(storage: Storage): string | null {
  return storage.getItem(SESSION_KEY);
}

export function saveSessionId(storage: Storage, sessionId: string): void {
  storage.setItem(SESSION_KEY, sessionId);
}
