#include <pybind11/pybind11.h>

namespace py = pybind11;

void bind_core(py::module_& m);
void bind_sim(py::module_& m);

PYBIND11_MODULE(_homechain, m) {
    m.doc() = "Tiered home-ledger protocol core and simulator";
    bind_core(m);
    bind_sim(m);
}
