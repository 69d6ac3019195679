from .utility import *
from . import capacity, qkd
from .channel_model import BroadcastChannel, LinearOpticalNetwork, prune_to_cascade, reck_decompose
from .gaussian_core import g_function
from .verify import run_checks

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)


class Qbcast:
    """
    | Argument   | Type | Default | Description                                                                      |
    |------------|------|---------|----------------------------------------------------------------------------------|
    | output_dir | str  | None    | Where result files go. Falls back to QBCAST_OUTPUT_DIR, then the current directory. |
    | env        | str  | None    | Optional env file loaded before defaults are resolved.                           |
    | fmt        | str  | "csv"   | 'csv' writes one file per table, 'json' one file per command.                    |
    | precision  | int  | 9       | Significant digits for every float written.                                      |
    | workers    | int  | None    | joblib workers for sweeps. Falls back to QBCAST_WORKERS, then 1.                 |

    Every command computes, writes its files and returns a summary dict.
    """
    def __init__(self, output_dir: str = None, env: str = None, fmt: str = "csv", precision: int = DEFAULT_PRECISION, workers: int = None):
        self.output_dir = get_output_dir(output_dir, env)
        self.workers = get_workers(workers)
        self.fmt = fmt
        self.precision = precision
        if fmt not in ("csv", "json"):
            raise ParameterError(f"Unsupported output format: {fmt}")
        if precision < 1 or self.workers < 1:
            raise ParameterError(f"Precision and worker count must be positive, got {precision} and {self.workers}")

    def _path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _csv(self, name: str, header, rows) -> str:
        path = write_csv(self._path(name), header, rows, self.precision)
        logger.info("wrote %s", path)
        return path

    def _json(self, name: str, payload: dict) -> str:
        path = write_json(self._path(name), payload, self.precision)
        logger.info("wrote %s", path)
        return path

    def region(self, eta, n_s=(), resolution: int = 1) -> dict:
        """
        Capacity-region constraints of a broadcast channel.

        | Argument   | Type            | Default | Description                                           |
        |------------|-----------------|---------|-------------------------------------------------------|
        | eta        | list of float   | N/A     | Receiver transmittances eta_B1..eta_Bm.               |
        | n_s        | list of float   | ()      | Mean photon numbers for finite-energy boundaries (m = 2). |
        | resolution | int             | 1       | Points per boundary edge.                             |

        Returns:
            dict: Constraints, and for two receivers the boundary, time-sharing
            vertices and achievable boundaries, plus the files written.
        """
        etas = parse_float_list(eta)
        if not etas:
            raise ParameterError("At least one transmittance is required")
        n_values = parse_float_list(n_s)
        ch = BroadcastChannel(etas)
        region = capacity.capacity_region(ch)
        result = {
            'transmittances': list(ch.transmittances),
            'constraints': [{'subset': label, 'mask': mask, 'bound': bound} for label, mask, bound in region.constraints()],
        }
        plot_boundary = ch.m == 2 and ch.eta_b < 1
        if ch.m == 2 and not plot_boundary:
            logger.warning("eta_B = 1: the region is unbounded, no boundary is drawn")
        if plot_boundary:
            result['boundary'] = capacity.region_boundary_1to2(ch, resolution)
            result['time_sharing'] = capacity.time_sharing_region(ch).vertices()
            result['achievable'] = {n: capacity.region_boundary_1to2(ch, resolution, n_s=n) for n in n_values}
        elif n_values:
            result['achievable_constraints'] = {
                n: [{'mask': mask, 'bound': bound} for mask, bound in sorted(capacity.achievable_region(ch, n).bounds.items())]
                for n in n_values
            }

        if self.fmt == "json":
            files = [self._json("region.json", {**result, 'region': region.to_dict()})]
        else:
            files = [self._csv("constraints.csv", ["subset", "mask", "bound"],
                               [[c['subset'], c['mask'], c['bound']] for c in result['constraints']])]
            if plot_boundary:
                files.append(self._csv("boundary.csv", ["r_B", "r_C"], result['boundary']))
                files.append(self._csv("time_sharing.csv", ["r_B", "r_C"], result['time_sharing']))
                if n_values:
                    files.append(self._csv("achievable.csv", ["n_s", "r_B", "r_C"],
                                           [[n, x, y] for n in n_values for x, y in result['achievable'][n]]))
            elif n_values:
                files.append(self._csv("achievable.csv", ["n_s", "mask", "bound"],
                                       [[n, c['mask'], c['bound']] for n in n_values for c in result['achievable_constraints'][n]]))
        result['files'] = files
        return result

    def symmetric(self, eta: float, m_max: int) -> dict:
        """
        Rate sums of the symmetric 1-to-m channel for m = 1..m_max.

        Returns:
            dict: rows of (m, optimal_sum, time_share_sum) and the files written.
        """
        if int(m_max) != m_max or m_max < 1:
            raise ParameterError(f"m_max must be a positive integer, got {m_max}")
        rows = [[m, *capacity.symmetric_rate_sums(float(eta), m)] for m in range(1, int(m_max) + 1)]
        header = ["m", "optimal_sum", "time_share_sum"]
        if self.fmt == "json":
            files = [self._json("symmetric.json", {'eta': eta, 'rows': [dict(zip(header, row)) for row in rows]})]
        else:
            files = [self._csv("symmetric.csv", header, rows)]
        return {'eta': eta, 'rows': rows, 'files': files}

    def qkd(self, eta_b: float, eta_c: float, mu, resolution: int = 1, clamp: bool = False) -> dict:
        """
        Broadcast CVQKD key-rate regions for each modulation in `mu`.

        Scenarios are swept over the joblib pool; rows keep the order of `mu`.

        Returns:
            dict: per-mu key-rate pairs and region curves, plus the files written.
        """
        mus = parse_float_list(mu)
        if not mus:
            raise ParameterError("At least one modulation value mu is required")
        scenarios = [qkd.QkdScenario(float(eta_b), float(eta_c), m) for m in mus]
        results = Parallel(n_jobs=self.workers)(delayed(_qkd_point)(s, resolution, clamp) for s in scenarios)
        curve_rows = [[s.mu, label, x, y] for s, r in zip(scenarios, results) for label, curve in r['curves'].items() for x, y in curve]
        rate_rows = [[s.mu, scheme, *pair, r['gain']] for s, r in zip(scenarios, results) for scheme, pair in r['rates'].items()]
        if self.fmt == "json":
            files = [self._json("qkd.json", {'eta_b': eta_b, 'eta_c': eta_c, 'scenarios': [dict(mu=s.mu, **r) for s, r in zip(scenarios, results)]})]
        else:
            files = [
                self._csv("qkd_region.csv", ["mu", "curve", "K_AB", "K_AC"], curve_rows),
                self._csv("qkd_rates.csv", ["mu", "scheme", "K_AB", "K_AC", "gain"], rate_rows),
            ]
        return {'eta_b': eta_b, 'eta_c': eta_c, 'scenarios': results, 'files': files}

    def decompose(self, network: str) -> dict:
        """
        Decomposes a network file and reduces it to its broadcast cascade.

        Args:
            network (str): Path to a JSON file with l, unitary, input_mode and receiver_modes.

        Returns:
            dict: Channel transmittances, cascade, element counts and reconstruction residual.
        """
        net = LinearOpticalNetwork.load(network)
        decomposition = reck_decompose(net)
        ch, cascade = prune_to_cascade(net, decomposition)
        residual = float(np.linalg.norm(decomposition.reconstruct(net.l) - net.unitary))
        result = {
            'l': net.l,
            'transmittances': list(ch.transmittances),
            'eta_E': ch.eta_e,
            'cascade': cascade.to_dict(),
            'elements': len(decomposition),
            'residual': residual,
        }
        result['files'] = [self._json("decompose.json", result)]
        logger.info("decomposed %d-mode network into %d elements, residual %.3g", net.l, len(decomposition), residual)
        return result

    def verify(self, quick: bool = False, g=g_function) -> dict:
        """
        Runs the cross-check suite and writes verify.json.

        Raises:
            VerificationError: If any check exceeds its tolerance; the report is written first.
        """
        report = run_checks(quick=quick, g=g, workers=self.workers)
        payload = report.to_dict()
        payload['files'] = [self._json("verify.json", payload)]
        for check in report.checks:
            logger.info("check %s: %s", check.name, "ok" if check.passed else "FAILED")
        if not report.passed:
            raise VerificationError(f"Checks failed: {', '.join(report.failed)}")
        return payload


def _qkd_point(s, resolution: int, clamp: bool) -> dict:
    report = qkd.information_report(s)
    rates = {
        'simultaneous': qkd.key_rates_simultaneous(s, report),
        'charlie_first': qkd.key_rates_charlie_first(s, report),
        'bob_first': qkd.key_rates_bob_first(s, report),
    }
    if clamp:
        rates = {scheme: pair.clamped() for scheme, pair in rates.items()}
    return {
        'rates': {scheme: list(pair.as_tuple()) for scheme, pair in rates.items()},
        'gain': report.i_yz_given_x,
        'curves': qkd.bc_rate_region(s, resolution, clamp),
    }
