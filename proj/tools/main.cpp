#include "cli/app.hpp"

int main(int argc, char** argv)
{
    return graspkb::cli::run(argc, argv);
}
