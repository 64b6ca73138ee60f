// Wire types for the read-only bundle service. The client never computes
// law values itself; it only moves these payloads around.

export interface PredictRequest {
    task: string;
    p: number;
    n: number;
}

export interface PredictResponse {
    value: number;
    n_eff: number;
    f: number;
}

export interface ErrorBody {
    code: string;
    message: string;
}

export interface JointLawDoc {
    task: { name: string; direction: string | null };
    alpha: number;
    l_inf: number;
    betas: Record<string, number>;
    metric_direction: 'loss_like' | 'quality_like';
}

export interface TaskLawsDoc {
    joint_law: JointLawDoc;
    single_task: { beta: number; alpha: number; l_inf: number };
    fraction_fits: Record<string, unknown>;
    effective_fractions: Record<string, number>;
    /** (own weight p, model size n, observed value) triples. */
    observations: [number, number, number][];
}

export interface BundleBody {
    metric: string;
    direction: 'loss_like' | 'quality_like';
    testset: string;
    tasks: Record<string, TaskLawsDoc>;
    provenance: { dataset_sha256: string; tool_version: string };
}

export interface BundleDocument {
    schema_version: number;
    sha256: string;
    body: BundleBody;
}
