float v[N], w[N], z[N];

for (int i = 0; i < N; i += 2) {
    w[i] = v[i] + 1;
}
for (int i = 0; i < N; i += 2) {
    z[i] = v[i] - 1;
}
