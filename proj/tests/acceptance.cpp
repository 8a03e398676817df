// intentionally minimal until the acceptance suite lands
int main() { return 0; }
