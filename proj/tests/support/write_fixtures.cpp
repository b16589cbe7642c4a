// Regenerates the committed fixture cases under data/.
#include <fstream>
#include <iostream>

#include "fixtures.hpp"

int main() {
    const auto path = gridsplit::testing::data_dir() / "planted22.json";
    std::ofstream out(path, std::ios::binary);
    out << gridsplit::to_json(gridsplit::testing::planted_case());
    if (!out) {
        std::cerr << "cannot write " << path << '\n';
        return 1;
    }
    std::cout << "wrote " << path << '\n';
    return 0;
}
