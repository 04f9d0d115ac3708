import pytest

_RESULTS = []


class AcceptanceRecorder:
    def __init__(self, criterion: str, title: str):
        self.criterion = criterion
        self.title = title

    def record(self, passed: bool, detail: str, gating: bool = True):
        status = "PASS" if passed else ("FAIL" if gating else "INFO")
        line = f"[acceptance {self.criterion}] {status} {self.title}: {detail}"
        _RESULTS.append(line)
        print(line)
        return passed


@pytest.fixture
def acceptance(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is None:
        raise RuntimeError("acceptance tests need @pytest.mark.criterion(id, title)")
    return AcceptanceRecorder(*marker.args)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion metadata")


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
