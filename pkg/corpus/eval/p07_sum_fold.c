float v[N], acc;

acc = 0;
for (int i = 0; i < N; i++) {
    acc += v[i];
}
