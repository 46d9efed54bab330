/** DOM rendering. Full re-render on every state change; the app is small
 * enough that diffing would buy nothing. Never fabricates content: every
 * rendered string comes from the state, which mirrors server payloads. */

import { highlightKeywords } from "./highlight.js";
import type { ChatViewState } from "./state.js";

export interface ViewHandles {
  thread: HTMLElement;
  evidencePanel: HTMLElement;
  disclaimer: HTMLElement;
  errorBanner: HTMLElement;
  retry: HTMLButtonElement;
  brainToggle: HTMLInputElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
}

export function findHandles(root: Document | HTMLElement): ViewHandles {
  const get = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) throw new Error(`missing element ${selector}`);
    return el;
  };
  return {
    thread: get("#thread"),
    evidencePanel: get("#evidence"),
    disclaimer: get("#disclaimer"),
    errorBanner: get("#error-banner"),
    retry: get<HTMLButtonElement>("#retry"),
    brainToggle: get<HTMLInputElement>("#brain-toggle"),
    input: get<HTMLInputElement>("#question"),
    sendButton: get<HTMLButtonElement>("#send"),
  };
}

function renderThread(container: HTMLElement, state: ChatViewState): void {
  container.textContent = "";
  for (const message of state.messages) {
    const bubble = container.ownerDocument.createElement("div");
    bubble.className = `message ${message.role}`;
    const text = container.ownerDocument.createElement("p");
    text.textContent = message.text;
    bubble.appendChild(text);
    if (message.role === "doctor" && message.usedBrain === false) {
      const badge = container.ownerDocument.createElement("span");
      badge.className = "badge unverified";
      badge.textContent = "unverified — model prior knowledge";
      bubble.appendChild(badge);
    }
    container.appendChild(bubble);
  }
}

function renderEvidence(container: HTMLElement, state: ChatViewState): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (state.evidence.length === 0) {
    const empty = doc.createElement("div");
    empty.className = "evidence-empty";
    empty.textContent = "No retrieved evidence for the latest answer.";
    container.appendChild(empty);
    return;
  }
  for (const card of state.evidence) {
    const el = doc.createElement("article");
    el.className = "evidence-card";
    const head = doc.createElement("header");
    head.textContent = `${card.doc_id} · section ${card.section_index} · ${card.score} hits`;
    el.appendChild(head);
    const body = doc.createElement("p");
    for (const segment of highlightKeywords(card.selected_text, state.keywords)) {
      if (segment.highlighted) {
        const mark = doc.createElement("mark");
        mark.textContent = segment.text;
        body.appendChild(mark);
      } else {
        body.appendChild(doc.createTextNode(segment.text));
      }
    }
    el.appendChild(body);
    container.appendChild(el);
  }
}

export function render(handles: ViewHandles, state: ChatViewState): void {
  renderThread(handles.thread, state);
  renderEvidence(handles.evidencePanel, state);

  handles.disclaimer.textContent = state.disclaimer;
  handles.disclaimer.hidden = state.disclaimer === "";

  handles.errorBanner.textContent = state.errorBanner ?? "";
  handles.errorBanner.hidden = state.errorBanner === null;

  handles.retry.hidden = state.retryQuestion === null;

  handles.brainToggle.checked = state.brainEnabled;
  handles.input.disabled = state.pending;
  handles.sendButton.disabled = state.pending || handles.input.value.trim() === "";
}
