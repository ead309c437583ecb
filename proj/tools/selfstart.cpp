#include "selfstart/cli.hpp"

int main(int argc, char** argv)
{
    return selfstart::cli::run(argc, argv);
}
