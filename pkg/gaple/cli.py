"""gaple command line"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .analysis import build_curve, curve_trend, merge_curves
from .checkpoint import PERCEPTION_TAG, POLICY_TAG, load_checkpoint, save_checkpoint
from .config import RunConfig, load_config, with_overrides
from .errors import GapleError
from .evaluation import LearnedPolicy, RandomPolicy, evaluate, gap_csv, report_csv, write_traces
from .house.layout import format_layout, parse_layout
from .house.pgm import write_render
from .house.render import render
from .models import Heading, Pose
from .observe import make_source
from .perception.dataset import build_dataset, split_holdout
from .perception.metrics import depth_rmse, majority_frequency, mean_iou, pixel_accuracy
from .perception.network import PerceptionParams, perception_layout, predict_batch
from .perception.train import train_perception
from .policynet import LAYOUT, PolicyParams
from .presets import analysis_houses, build_setting, load_houses
from .training.trainer import train

logger = logging.getLogger(__name__)


def _n_classes(config: RunConfig) -> int:
    return len(config.houses.labels) + 1


def cmd_gen_houses(config: RunConfig, out_dir: Path) -> List[Path]:
    houses_dir = out_dir / 'houses'
    houses_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for layout in load_houses(config.houses):
        path = houses_dir / f'{layout.name}.txt'
        path.write_text(format_layout(layout))
        written.append(path)
    print(f'✓ wrote {len(written)} layouts to {houses_dir}')
    return written


def cmd_train_perception(config: RunConfig, out_dir: Path) -> Path:
    section = config.perception
    cfg = replace(config.render.render_config(), width=section.resolution, height=section.resolution)
    samples = build_dataset(load_houses(config.houses, section.houses), cfg, section.background_frac_cap,
                            section.sample_cap, seed=config.seed, workers=config.policy.workers)
    train_set, held = split_holdout(samples, section.holdout_frac, config.seed)
    params, curve = train_perception(train_set, section.epochs, section.lr, section.batch_size,
                                     lam=section.lambda_depth, seed=config.seed, n_classes=_n_classes(config))

    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_checkpoint(out_dir / 'perception.ckpt', PERCEPTION_TAG, params.flat)
    (out_dir / 'perception_loss.csv').write_text(
        'epoch,loss\n' + ''.join(f'{i + 1},{loss!r}\n' for i, loss in enumerate(curve)))

    evaluated = held or train_set
    labels, depth = predict_batch(params, np.stack([s.rgb for s in evaluated]))
    gt_labels = np.stack([s.gt_semantic for s in evaluated])
    gt_depth = np.stack([s.gt_depth for s in evaluated])
    metrics = {
        'mean_iou': mean_iou(labels, gt_labels, params.n_classes),
        'depth_rmse': depth_rmse(depth, gt_depth),
        'pixel_accuracy': pixel_accuracy(labels, gt_labels),
        'majority_frequency': majority_frequency(gt_labels),
    }
    (out_dir / 'perception_metrics.csv').write_text(
        'metric,value\n' + ''.join(f'{k},{v:.6f}\n' for k, v in metrics.items()))
    logger.info('perception metrics on %d frames: %s', len(evaluated), metrics)
    print(f'✓ perception trained on {len(train_set)} frames; checkpoint at {path}')
    return path


def cmd_train_policy(config: RunConfig, out_dir: Path) -> Path:
    setting = build_setting(config)
    result = train(config.policy.train_config(config.seed), setting.train, checkpoint_dir=out_dir / 'checkpoints')
    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_checkpoint(out_dir / 'policy.ckpt', POLICY_TAG, result.params.flat)
    result.log.write(out_dir / 'train_log.csv')
    print(f'✓ policy trained for {result.env_steps} steps ({result.version} updates); checkpoint at {path}')
    return path


def _load_perception(config: RunConfig, out_dir: Path) -> Optional[PerceptionParams]:
    if config.eval.inputs not in ('gt_seg_pred_depth', 'predicted'):
        return None
    path = Path(config.eval.perception_checkpoint or out_dir / 'perception.ckpt')
    n_classes = _n_classes(config)
    return PerceptionParams(load_checkpoint(path, PERCEPTION_TAG, perception_layout(n_classes).size), n_classes)


def cmd_eval(config: RunConfig, out_dir: Path) -> Path:
    section = config.eval
    checkpoint = Path(section.checkpoint or out_dir / 'policy.ckpt')
    params = PolicyParams(load_checkpoint(checkpoint, POLICY_TAG, LAYOUT.size))
    source = make_source(section.inputs, _n_classes(config), section.flip_p, section.depth_sigma,
                         _load_perception(config, out_dir), config.perception.resolution)
    policy = LearnedPolicy(params, source, greedy=section.greedy)
    setting = build_setting(config)

    out_dir.mkdir(parents=True, exist_ok=True)
    kwargs = dict(n_starts=section.n_starts, cap=section.cap, seed=config.seed, k_max=section.k_max,
                  workers=section.workers)
    trained = evaluate(policy, setting.train, record=section.write_traces, **kwargs)
    report = out_dir / 'eval_train.csv'
    report.write_text(report_csv(trained))
    (out_dir / 'eval_random_train.csv').write_text(report_csv(evaluate(RandomPolicy(), setting.train, **kwargs)))
    if section.write_traces:
        write_traces(trained, out_dir / 'traces' / 'train')

    if setting.test:
        held = evaluate(policy, setting.test, record=section.write_traces, **kwargs)
        (out_dir / 'eval_test.csv').write_text(report_csv(held))
        (out_dir / 'eval_random_test.csv').write_text(report_csv(evaluate(RandomPolicy(), setting.test, **kwargs)))
        (out_dir / 'eval_gap.csv').write_text(gap_csv(trained.aggregate, held.aggregate))
        if section.write_traces:
            write_traces(held, out_dir / 'traces' / 'test')

    rates = ' '.join(f'{r:.2f}' for r in trained.aggregate.success_rate)
    print(f'✓ evaluated {trained.aggregate.n_episodes} episodes on trained pairs (sr {rates}); report at {report}')
    return report


def cmd_analyze(config: RunConfig, out_dir: Path) -> Path:
    section = config.analysis
    cfg = config.render.render_config()
    layouts = analysis_houses(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    trend_lines = ['extractor,house,spearman']
    for extractor in section.extractors:
        curves = [build_curve(layout, extractor, section.max_steps, section.sample_cap, config.seed, cfg)
                  for layout in layouts]
        trends = [curve_trend(c) for c in curves]
        trend_lines.extend(f'{extractor},{layout.name},{t:.6f}' for layout, t in zip(layouts, trends))
        trend_lines.append(f'{extractor},mean,{float(np.nanmean(trends)):.6f}')
        (out_dir / f'curve_{extractor}.csv').write_text(merge_curves(curves).to_csv())
    path = out_dir / 'curve_trend.csv'
    path.write_text('\n'.join(trend_lines) + '\n')
    print(f'✓ distance curves for {len(layouts)} houses written to {out_dir}')
    return path


def parse_pose(text: str) -> Pose:
    try:
        x, y, heading = text.split(',')
        return Pose(int(x), int(y), Heading[heading.strip().upper()])
    except (ValueError, KeyError):
        raise argparse.ArgumentTypeError(f'pose must look like x,y,N|E|S|W, got {text!r}')


def cmd_render(config: RunConfig, out_dir: Path, layout_path: Path, pose: Pose) -> Dict[str, Path]:
    if not layout_path.is_file():
        raise FileNotFoundError(f'layout file not found: {layout_path}')
    layout = parse_layout(layout_path.read_text(), name=layout_path.stem)
    if not layout.is_floor(pose.x, pose.y):
        raise GapleError(f'pose {pose} is not on a floor cell of {layout.name}')
    paths = write_render(render(layout, pose, config.render.render_config()), out_dir,
                         stem=f'{layout.name}_{pose.x}_{pose.y}_{pose.heading.name}')
    print(f'✓ rendered {layout.name} at {pose} into {out_dir}')
    return paths


COMMANDS: Dict[str, Callable[..., object]] = {
    'gen-houses': cmd_gen_houses,
    'train-perception': cmd_train_perception,
    'train-policy': cmd_train_policy,
    'eval': cmd_eval,
    'analyze': cmd_analyze,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='TOML file overlaying the defaults')
    common.add_argument('--seed', type=int, help='override the top-level seed')
    common.add_argument('--out-dir', type=Path, default=Path('out'), help='output directory (default: out)')
    common.add_argument('--setting', choices=['objects', 'environments'], help='generalization preset')
    common.add_argument('--workers', type=int, help='training/evaluation worker threads')

    parser = argparse.ArgumentParser(prog='gaple', description='Grid-house object approaching: train and evaluate')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('gen-houses', parents=[common], help='generate house layouts')
    sub.add_parser('train-perception', parents=[common], help='train the segmentation/depth network')
    sub.add_parser('train-policy', parents=[common], help='train the navigation policy')
    sub.add_parser('eval', parents=[common], help='evaluate a policy checkpoint')
    sub.add_parser('analyze', parents=[common], help='feature distance versus physical distance')
    render_cmd = sub.add_parser('render', parents=[common], help='render one pose to PGM/PPM images')
    render_cmd.add_argument('layout', type=Path, help='layout file')
    render_cmd.add_argument('--pose', type=parse_pose, required=True, help='x,y,H with H one of N E S W')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = with_overrides(load_config(args.config), args.seed, args.workers, args.setting)
        logging.basicConfig(level=config.logging.level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
        if args.command == 'render':
            cmd_render(config, args.out_dir, args.layout, args.pose)
        else:
            COMMANDS[args.command](config, args.out_dir)
    except (GapleError, FileNotFoundError, OSError) as exc:
        print(f'gaple {args.command}: error: {exc}', file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
