#include "ksns/harness/verification.hpp"

#include <map>

namespace ksns::harness {

namespace {

const char* const kCoexistenceParams = R"(model.chi1 = 0.5
model.chi2 = 0.5
model.a1 = 0.5
model.a2 = 0.5
model.mu1 = 1
model.mu2 = 1
model.alpha = 1
model.beta = 1
model.gamma = 1
model.delta = 1
model.kappa = 1
model.eps = 0.001
)";

const char* const kVortex2d =
    R"u(init.u = "0.05*pi*sin(pi*x)^2*sin(2*pi*y)", "-0.05*pi*sin(2*pi*x)*sin(pi*y)^2")u";
const char* const kVortex3d =
    R"u(init.u = "0.05*pi*sin(pi*x)^2*sin(2*pi*y)*sin(pi*z)^2", "-0.05*pi*sin(2*pi*x)*sin(pi*y)^2*sin(pi*z)^2", "0")u";

std::string exclusion_params()
{
    std::string s = kCoexistenceParams;
    s.replace(s.find("model.a1 = 0.5"), 14, "model.a1 = 1.5");
    return s;
}

const std::map<std::string, std::string>& texts()
{
    static const std::map<std::string, std::string> t = [] {
        std::map<std::string, std::string> m;
        m["coexistence"] = std::string("# Two species relaxing to the coexistence state (2/3, 2/3).\n") +
                           "name = \"coexistence\"\ngrid.dim = 2\ngrid.cells = 64 64\ngrid.lengths = 1 1\n" +
                           kCoexistenceParams +
                           "init.n1 = \"2/3 + 0.3*cos(pi*x)*cos(pi*y)\"\n"
                           "init.n2 = \"2/3 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                           "init.c = \"1\"\n" +
                           kVortex2d +
                           "\npotential.phi = \"0.1*x\"\n"
                           "run.t_end = 60\n"
                           "output.cadence = 0.5\n"
                           "output.dir = \"out/coexistence\"\n";
        m["exclusion"] = std::string("# Species 1 is outcompeted: limit (0, 1).\n") +
                         "name = \"exclusion\"\ngrid.dim = 2\ngrid.cells = 64 64\ngrid.lengths = 1 1\n" +
                         exclusion_params() +
                         "init.n1 = \"0.3*(1 + 0.5*cos(pi*x)*cos(pi*y))\"\n"
                         "init.n2 = \"1 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                         "init.c = \"1\"\n" +
                         kVortex2d +
                         "\npotential.phi = \"0.1*x\"\n"
                         "run.t_end = 60\n"
                         "output.cadence = 0.5\n"
                         "output.dir = \"out/exclusion\"\n";
        m["coexistence_3d"] = std::string("# Three-dimensional smoke variant of the coexistence scenario.\n") +
                              "name = \"coexistence_3d\"\ngrid.dim = 3\ngrid.cells = 32 32 32\ngrid.lengths = 1 1 1\n" +
                              kCoexistenceParams +
                              "init.n1 = \"2/3 + 0.3*cos(pi*x)*cos(pi*y)*cos(pi*z)\"\n"
                              "init.n2 = \"2/3 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                              "init.c = \"1\"\n" +
                              kVortex3d +
                              "\npotential.phi = \"0.1*x\"\n"
                              "run.t_end = 0.5\n"
                              "output.cadence = 0.1\n"
                              "output.dir = \"out/coexistence_3d\"\n";
        m["exclusion_3d"] = std::string("# Three-dimensional smoke variant of the exclusion scenario.\n") +
                            "name = \"exclusion_3d\"\ngrid.dim = 3\ngrid.cells = 32 32 32\ngrid.lengths = 1 1 1\n" +
                            exclusion_params() +
                            "init.n1 = \"0.3*(1 + 0.5*cos(pi*x)*cos(pi*y)*cos(pi*z))\"\n"
                            "init.n2 = \"1 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                            "init.c = \"1\"\n" +
                            kVortex3d +
                            "\npotential.phi = \"0.1*x\"\n"
                            "run.t_end = 0.5\n"
                            "output.cadence = 0.1\n"
                            "output.dir = \"out/exclusion_3d\"\n";
        m["uniform"] = std::string("# Spatially uniform data: the solver must reproduce the kinetics ODE.\n") +
                       "name = \"uniform\"\ngrid.dim = 2\ngrid.cells = 32 32\ngrid.lengths = 1 1\n" +
                       kCoexistenceParams +
                       "init.n1 = \"0.6\"\n"
                       "init.n2 = \"0.7\"\n"
                       "init.c = \"1\"\n"
                       "potential.phi = \"0\"\n"
                       "run.t_end = 10\n"
                       "run.dt_fixed = 0.001\n"
                       "output.cadence = 1\n"
                       "output.dir = \"out/uniform\"\n";
        m["eps_sweep"] = std::string("# Short coupled run for comparing regularisation levels.\n") +
                         "name = \"eps_sweep\"\ngrid.dim = 2\ngrid.cells = 32 32\ngrid.lengths = 1 1\n" +
                         kCoexistenceParams +
                         "init.n1 = \"2/3 + 0.3*cos(pi*x)*cos(pi*y)\"\n"
                         "init.n2 = \"2/3 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                         "init.c = \"1\"\n" +
                         kVortex2d +
                         "\npotential.phi = \"0.1*x\"\n"
                         "run.t_end = 5\n"
                         "run.dt_fixed = 0.005\n"
                         "output.cadence = 0.1\n"
                         "output.dir = \"out/eps_sweep\"\n";
        std::string weak = kCoexistenceParams;
        weak.replace(weak.find("model.eps = 0.001"), 17, "model.eps = 0");
        m["weak_smooth"] = std::string("# Smooth unregularised run for the weak-identity residuals.\n") +
                           "name = \"weak_smooth\"\ngrid.dim = 2\ngrid.cells = 32 32\ngrid.lengths = 1 1\n" + weak +
                           "init.n1 = \"2/3 + 0.3*cos(pi*x)*cos(pi*y)\"\n"
                           "init.n2 = \"2/3 + 0.3*cos(2*pi*x)*cos(pi*y)\"\n"
                           "init.c = \"1 + 0.2*cos(pi*x)\"\n"
                           "# Fluid starts at rest: a vortex that is not a compatible Stokes datum\n"
                           "# adds an initial layer that masks the first-order consistency.\n"
                           "init.u = \"0\", \"0\"\n"
                           "potential.phi = \"0.1*x\"\n"
                           "run.t_end = 0.5\n"
                           "run.dt_fixed = 0.002\n"
                           "run.seed = 7\n"
                           "output.cadence = 0.1\n"
                           "output.dir = \"out/weak_smooth\"\n";
        return m;
    }();
    return t;
}

}  // namespace

const std::vector<std::string>& canonical_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, _] : texts()) n.push_back(k);
        return n;
    }();
    return names;
}

std::string canonical_config_text(const std::string& name)
{
    const auto it = texts().find(name);
    if (it == texts().end()) throw ConfigError("<canonical>", 0, "no canonical scenario named '" + name + "'");
    return it->second;
}

ScenarioConfig canonical_scenario(StabilizationCase c, int dim)
{
    std::string name = to_string(c);
    if (dim == 3) name += "_3d";
    return parse_config(canonical_config_text(name), name);
}

StabilizationCase parse_case(const std::string& name)
{
    if (name == "coexistence" || name == "i") return StabilizationCase::coexistence;
    if (name == "exclusion" || name == "ii") return StabilizationCase::exclusion;
    throw ConfigError("<case>", 0, "unknown case '" + name + "' (expected coexistence or exclusion)");
}

const char* to_string(StabilizationCase c) { return c == StabilizationCase::coexistence ? "coexistence" : "exclusion"; }

}  // namespace ksns::harness
