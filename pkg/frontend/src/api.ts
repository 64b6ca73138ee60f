import type { BundleDocument, ErrorBody, PredictRequest, PredictResponse } from './types.js';

/** A request the service rejected (carries the structured error body). */
export class ServiceError extends Error {
    constructor(
        public readonly code: string,
        message: string,
        public readonly status: number,
    ) {
        super(message);
    }
}

/** The service could not be reached at all. */
export class ServiceUnreachable extends Error {}

async function parseError(response: Response): Promise<ServiceError> {
    try {
        const body = (await response.json()) as ErrorBody;
        return new ServiceError(body.code, body.message, response.status);
    } catch {
        return new ServiceError('unknown', `HTTP ${response.status}`, response.status);
    }
}

export class ApiClient {
    constructor(private readonly base: string = '') {}

    async bundle(): Promise<BundleDocument> {
        let response: Response;
        try {
            response = await fetch(`${this.base}/api/bundle`);
        } catch (err) {
            throw new ServiceUnreachable(String(err));
        }
        if (!response.ok) {
            throw await parseError(response);
        }
        return (await response.json()) as BundleDocument;
    }

    async predict(request: PredictRequest): Promise<PredictResponse> {
        let response: Response;
        try {
            response = await fetch(`${this.base}/api/predict`, {
                method: 'POST',
                headers: { 'Content-Type': 'application/json' },
                body: JSON.stringify(request),
            });
        } catch (err) {
            throw new ServiceUnreachable(String(err));
        }
        if (!response.ok) {
            throw await parseError(response);
        }
        return (await response.json()) as PredictResponse;
    }
}
