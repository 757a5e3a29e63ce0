/** Typed client for the review service API. Every displayed number comes
 * from these responses; the UI never computes scores locally. */

export interface ComponentScores {
  comet_raw: number;
  bert_raw: number;
  clip_raw: number;
  s_orig: number;
  s_bt: number;
  normalized: [number, number, number];
  hybrid: number;
}

export interface ReviewItem {
  caption_id: number;
  image_file_ref: string;
  source_text: string;
  current_translation: string;
  back_translation: string;
  scores: ComponentScores;
  revision: number;
}

export interface QueuePage {
  items: ReviewItem[];
  page: number;
  total: number;
}

export interface ComponentThresholds {
  comet: number;
  bert: number;
  clip: number;
}

export interface Stats {
  counts: Record<string, number>;
  config: {
    weights: number[];
    threshold: number;
    component_thresholds: ComponentThresholds;
  };
}

export interface ApiError {
  code: string;
  message: string;
}

export class RequestFailed extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
  get isConflict(): boolean {
    return this.status === 409 || this.body.code === "conflict";
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: ApiError;
    try {
      body = (await response.json()) as ApiError;
    } catch {
      body = { code: "http_error", message: `status ${response.status}` };
    }
    throw new RequestFailed(response.status, body);
  }
  return (await response.json()) as T;
}

export class ReviewApi {
  constructor(private readonly base: string = "") {}

  queue(page = 1, size = 50): Promise<QueuePage> {
    return request(this.base, `/api/queue?page=${page}&size=${size}`);
  }

  stats(): Promise<Stats> {
    return request(this.base, "/api/stats");
  }

  rescore(captionId: number, text: string): Promise<ComponentScores> {
    return request(this.base, `/api/captions/${captionId}/rescore`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  accept(captionId: number, text: string, revision: number): Promise<unknown> {
    return request(this.base, `/api/captions/${captionId}/accept`, {
      method: "POST",
      body: JSON.stringify({ text, revision }),
    });
  }

  reject(captionId: number, revision: number): Promise<unknown> {
    return request(this.base, `/api/captions/${captionId}/reject`, {
      method: "POST",
      body: JSON.stringify({ revision }),
    });
  }
}
