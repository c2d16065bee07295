float v[N], w[N];

for (int i = 0; i < N; i++) {
    w[i] = v[i];
}
for (int i = 0; i < N; i++) {
    w[i] = 2 * w[i];
}
