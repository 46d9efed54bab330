/** Typed client for the question-answering service HTTP API. */

export interface EvidenceCard {
  doc_id: string;
  section_index: number;
  score: number;
  selected_text: string;
}

export interface AnswerPayload {
  answer: string;
  keywords: string[];
  evidence: EvidenceCard[];
  used_brain: boolean;
  disclaimer: string;
}

export interface TranscriptTurn {
  question: string;
  answer: AnswerPayload;
  timestamp: string;
}

export interface Transcript {
  session_id: string;
  turns: TranscriptTurn[];
}

/** Server answered with a non-2xx status (the body's detail if present). */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export async function createSession(baseUrl: string): Promise<string> {
  const data = await requestJson<{ session_id: string }>(
    `${baseUrl}/v1/sessions`,
    { method: "POST" },
  );
  return data.session_id;
}

export async function sendMessage(
  baseUrl: string,
  sessionId: string,
  question: string,
  useBrain: boolean,
): Promise<AnswerPayload> {
  return requestJson<AnswerPayload>(
    `${baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/messages`,
    {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question, use_brain: useBrain }),
    },
  );
}

export async function getTranscript(
  baseUrl: string,
  sessionId: string,
): Promise<Transcript> {
  return requestJson<Transcript>(
    `${baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}`,
  );
}
