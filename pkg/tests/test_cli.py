"""
End-to-end tests for the gaple command line
"""
import pytest

from gaple.cli import main
from gaple.house.layout import parse_layout

from .conftest import ROOM

pytestmark = pytest.mark.integration

SMALL = """
[render]
width = 24
height = 24

[houses]
count = 2
files = ["{room}"]

[setting]
name = "objects"
train_targets = 1
test_targets = 1

[perception]
resolution = 12
epochs = 1
batch_size = 4
sample_cap = 8

[policy]
max_env_steps = 150
episode_step_cap = 40

[eval]
n_starts = 3
cap = 40
write_traces = true

[analysis]
houses = 1
max_steps = 3
sample_cap = 40
"""


@pytest.fixture(name="room_file")
def room_file_fixture(tmp_path):
    """The open room written as a layout file"""
    path = tmp_path / "room.txt"
    path.write_text(ROOM)
    return path


@pytest.fixture(name="small_config")
def small_config_fixture(tmp_path, room_file):
    """Config keeping every command fast"""
    path = tmp_path / "small.toml"
    path.write_text(SMALL.format(room=room_file.as_posix()))
    return path


def test_render(room_file, tmp_path, capsys):
    """One pose becomes three image files"""
    out = tmp_path / "renders"
    assert main(["render", str(room_file), "--pose", "3,3,N", "--out-dir", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["room_3_3_N_depth.pgm", "room_3_3_N_rgb.ppm", "room_3_3_N_semantic.pgm"]
    assert "✓" in capsys.readouterr().out


def test_render_off_floor(room_file, tmp_path, capsys):
    """Poses inside walls are refused"""
    assert main(["render", str(room_file), "--pose", "0,0,N", "--out-dir", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_gen_houses(tmp_path):
    """Generated layouts are written and parse back"""
    config = tmp_path / "gen.toml"
    config.write_text("[houses]\ncount = 2\n")
    assert main(["gen-houses", "--config", str(config), "--out-dir", str(tmp_path)]) == 0
    files = sorted((tmp_path / "houses").glob("*.txt"))
    assert [f.name for f in files] == ["house_0.txt", "house_1.txt"]
    assert parse_layout(files[0].read_text()).width == 16


def test_unknown_key_exits_nonzero(tmp_path, capsys):
    """A misspelt key stops the run and names the line"""
    config = tmp_path / "bad.toml"
    config.write_text("[policy]\nlerning_rate = 0.1\n")
    assert main(["train-policy", "--config", str(config), "--out-dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "lerning_rate" in err and "line 2" in err


def test_eval_without_checkpoint(small_config, tmp_path, capsys):
    """Evaluating before training reports the missing checkpoint"""
    assert main(["eval", "--config", str(small_config), "--out-dir", str(tmp_path / "empty")]) == 1
    assert "policy.ckpt" in capsys.readouterr().err


def test_train_then_eval(small_config, tmp_path):
    """A short training run produces a checkpoint that evaluation reads"""
    out = tmp_path / "run"
    args = ["--config", str(small_config), "--out-dir", str(out), "--seed", "3"]
    assert main(["train-policy", *args]) == 0
    assert (out / "policy.ckpt").is_file()
    assert (out / "train_log.csv").read_text().startswith("step,pair_id,")

    assert main(["eval", *args]) == 0
    for name in ("eval_train.csv", "eval_random_train.csv", "eval_test.csv", "eval_random_test.csv",
                 "eval_gap.csv"):
        assert (out / name).is_file(), name
    assert (out / "eval_train.csv").read_text().splitlines()[1].startswith("room:television,")
    assert (out / "eval_test.csv").read_text().splitlines()[1].startswith("room:sofa,")
    assert list((out / "traces" / "train").glob("*.csv"))


def test_train_perception(small_config, tmp_path):
    """Perception training writes its checkpoint, loss curve and metrics"""
    out = tmp_path / "perc"
    assert main(["train-perception", "--config", str(small_config), "--out-dir", str(out)]) == 0
    assert (out / "perception.ckpt").is_file()
    assert len((out / "perception_loss.csv").read_text().splitlines()) == 2
    metrics = (out / "perception_metrics.csv").read_text()
    assert "mean_iou" in metrics and "depth_rmse" in metrics


def test_analyze(small_config, tmp_path):
    """Curves and trends are written per extractor"""
    out = tmp_path / "curves"
    assert main(["analyze", "--config", str(small_config), "--out-dir", str(out)]) == 0
    assert (out / "curve_depth10.csv").read_text().startswith("bin,mean_dist,count")
    assert (out / "curve_gray10.csv").is_file()
    trend = (out / "curve_trend.csv").read_text().splitlines()
    assert trend[0] == "extractor,house,spearman"
    assert any(line.startswith("depth10,mean,") for line in trend)


def test_unknown_extractor_exits_nonzero(tmp_path, capsys):
    """Analysis with an unregistered extractor stops with an error"""
    config = tmp_path / "bad.toml"
    config.write_text('[analysis]\nextractors = ["sift"]\n')
    assert main(["analyze", "--config", str(config), "--out-dir", str(tmp_path)]) == 1
    assert "sift" in capsys.readouterr().err


def test_runs_repeat_byte_for_byte(small_config, tmp_path):
    """Two runs with the same seed write identical files"""
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run
        args = ["--config", str(small_config), "--out-dir", str(out), "--seed", "5"]
        for command in ("train-policy", "eval", "analyze"):
            assert main([command, *args]) == 0
        outputs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()})
    assert outputs[0].keys() == outputs[1].keys()
    assert "policy.ckpt" in {p.as_posix() for p in outputs[0]}
    for path, data in outputs[0].items():
        assert outputs[1][path] == data, path
