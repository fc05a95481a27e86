package demo;

public class Listing4 {
    public byte[] fingerprint() {
        String text = "my bytes";
        MyHash hash = new MyHash();
        byte[] digest = hash.sha256(text.getBytes());
        return digest;
    }
}
