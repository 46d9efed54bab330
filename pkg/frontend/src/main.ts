/** Application wiring: one in-flight question per session, session created
 * lazily on the first send, brain toggle and session id persisted locally. */

import { ApiError, createSession, getTranscript, sendMessage } from "./api.js";
import {
  applyAnswer,
  applyServerError,
  applyTransportFailure,
  beginSend,
  fromTranscript,
  initialState,
  loadBrainToggle,
  loadSessionId,
  saveBrainToggle,
  saveSessionId,
  setBrainEnabled,
  type ChatViewState,
} from "./state.js";
import { findHandles, render, type ViewHandles } from "./view.js";

export interface AppOptions {
  baseUrl?: string;
  storage?: Storage;
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8080";

export async function initApp(
  root: Document,
  options: AppOptions = {},
): Promise<{ getState: () => ChatViewState; handles: ViewHandles }> {
  const storage = options.storage ?? root.defaultView!.localStorage;
  const baseUrl = options.baseUrl ?? DEFAULT_BASE_URL;
  const handles = findHandles(root);

  let state = initialState(loadBrainToggle(storage));
  const update = (next: ChatViewState) => {
    state = next;
    render(handles, state);
  };

  // a live session from a previous page load is rebuilt from the server
  const existing = loadSessionId(storage);
  if (existing) {
    try {
      update(fromTranscript(state, await getTranscript(baseUrl, existing)));
    } catch {
      // stale or unknown session; start fresh on the next send
    }
  }

  async function submit(question: string): Promise<void> {
    if (!question.trim() || state.pending) return;
    update(beginSend(state));
    try {
      if (!state.sessionId) {
        const sessionId = await createSession(baseUrl);
        saveSessionId(storage, sessionId);
        update({ ...state, sessionId });
      }
      const payload = await sendMessage(
        baseUrl,
        state.sessionId!,
        question,
        state.brainEnabled,
      );
      handles.input.value = "";
      update(applyAnswer(state, question, payload));
    } catch (error) {
      if (error instanceof ApiError) {
        update(applyServerError(state, error.message));
      } else {
        update(applyTransportFailure(state, question));
      }
    }
  }

  handles.sendButton.addEventListener("click", () => {
    void submit(handles.input.value);
  });
  handles.input.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") {
      void submit(handles.input.value);
    }
  });
  handles.input.addEventListener("input", () => render(handles, state));
  handles.retry.addEventListener("click", () => {
    const question = state.retryQuestion;
    if (question) void submit(question);
  });
  handles.brainToggle.addEventListener("change", () => {
    saveBrainToggle(storage, handles.brainToggle.checked);
    update(setBrainEnabled(state, handles.brainToggle.checked));
  });

  render(handles, state);
  return { getState: () => state, handles };
}

declare global {
  interface Window {
    MEDBRAIN_BASE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("thread")) {
  void initApp(document, { baseUrl: window.MEDBRAIN_BASE_URL });
}
