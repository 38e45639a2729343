import java.io.IOException;

class NoPackage {
    void touch() throws IOException {
    }
}
